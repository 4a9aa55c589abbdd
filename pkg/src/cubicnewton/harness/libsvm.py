"""LibSVM-format dataset ingestion, serialization, and seeded splitting."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import EmptyDataset, NonAscendingIndex, ParseError, SizeExceeded
from ..problems import LogisticProblem


@dataclass
class Dataset:
    features: sparse.csr_matrix
    labels: np.ndarray  # values in {-1, +1}
    name: str = ""
    d_declared: int = 0

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def to_problem(self, l2_reg=0.0):
        return LogisticProblem(self.features.toarray(), self.labels, l2_reg=l2_reg)


def parse_libsvm(source, n_features=None, name="") -> Dataset:
    """Parse "label idx:val idx:val ..." lines with 1-based ascending indices.

    Labels in {0, 1} are remapped to {-1, +1}; malformed lines raise with the
    offending line number (never silently skipped).  `n_features` overrides the
    dimension inferred from the largest index seen.
    """
    if isinstance(source, (str, bytes)):
        import os

        if isinstance(source, str) and (os.path.exists(source) or "\n" not in source and source.endswith((".txt", ".libsvm", ".svm"))):
            stream = open(source, "r")
        else:
            stream = io.StringIO(source.decode() if isinstance(source, bytes) else source)
    elif hasattr(source, "read"):
        stream = source
    else:
        stream = io.StringIO("\n".join(source))

    raw_labels = []
    rows, cols, vals = [], [], []
    max_index = 0
    lineno = 0
    try:
        for line in stream:
            lineno += 1
            line = line.rstrip("\n").rstrip("\r")
            tokens = line.split()
            if not tokens:
                raise ParseError("empty line", line=lineno)
            try:
                label = float(tokens[0])
            except ValueError:
                raise ParseError(f"bad label {tokens[0]!r}", line=lineno) from None
            if label not in (-1.0, 0.0, 1.0):
                raise ParseError(f"label must be -1/0/+1, got {tokens[0]!r}", line=lineno)
            prev_idx = 0
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise ParseError(f"expected idx:val, got {tok!r}", line=lineno)
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(f"bad idx:val token {tok!r}", line=lineno) from None
                if idx < 1:
                    raise ParseError(f"indices are 1-based, got {idx}", line=lineno)
                if idx <= prev_idx:
                    raise NonAscendingIndex(
                        f"index {idx} after {prev_idx}", line=lineno
                    )
                if n_features is not None and idx > n_features:
                    raise ParseError(
                        f"index {idx} exceeds declared dimension {n_features}",
                        line=lineno,
                    )
                prev_idx = idx
                rows.append(len(raw_labels))
                cols.append(idx - 1)
                vals.append(val)
                max_index = max(max_index, idx)
            raw_labels.append(label)
    finally:
        if stream is not source and hasattr(stream, "close"):
            stream.close()

    if not raw_labels:
        raise EmptyDataset("no data rows")
    labels = np.asarray(raw_labels)
    if np.any(labels == 0.0):  # {0,1} convention
        labels = np.where(labels > 0.5, 1.0, -1.0)
    d = n_features if n_features is not None else max_index
    X = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(raw_labels), max(d, 1)), dtype=float
    )
    return Dataset(features=X, labels=labels, name=name, d_declared=d)


def serialize_libsvm(dataset: Dataset, stream) -> None:
    """Inverse of parse_libsvm; %.17g values round-trip bit-identically."""
    close = False
    if isinstance(stream, str):
        stream = open(stream, "w")
        close = True
    try:
        X = dataset.features.tocsr()
        for i in range(dataset.n):
            label = "+1" if dataset.labels[i] > 0 else "-1"
            start, end = X.indptr[i], X.indptr[i + 1]
            pairs = " ".join(
                f"{X.indices[k] + 1}:{X.data[k]:.17g}" for k in range(start, end)
            )
            stream.write(f"{label} {pairs}".rstrip() + "\n")
    finally:
        if close:
            stream.close()


def split(dataset: Dataset, train_n, test_n, seed):
    """Disjoint train/test index sets from a seeded shuffle."""
    if train_n + test_n > dataset.n:
        raise SizeExceeded(
            f"train_n + test_n = {train_n + test_n} exceeds n = {dataset.n}"
        )
    if train_n < 1:
        raise ValueError("train_n must be >= 1")
    perm = np.random.default_rng(seed).permutation(dataset.n)
    tr, te = perm[:train_n], perm[train_n:train_n + test_n]

    def take(idx, suffix):
        return Dataset(
            features=dataset.features[idx],
            labels=dataset.labels[idx],
            name=f"{dataset.name}{suffix}" if dataset.name else suffix.lstrip("-"),
            d_declared=dataset.d_declared,
        )

    return take(tr, "-train"), take(te, "-test")
