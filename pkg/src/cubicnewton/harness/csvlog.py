"""RFC-4180 CSV emission/ingestion for iterate logs (LF line endings, '.' decimal)."""

from __future__ import annotations

import csv

from .records import CSV_FIELDS, IterateLog

_FLOAT_FIELDS = {"train_loss", "test_loss", "step_norm", "cert", "wall_ms"}
_INT_FIELDS = {"seed", "epoch", "t", "grad_samples_cum", "hess_samples_cum"}


def _fmt(name, value):
    if value is None:
        return ""
    if name in _FLOAT_FIELDS:
        return format(float(value), ".17g")  # lossless float64 round-trip
    return str(value)


def write_run_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow([_fmt(name, getattr(row, name)) for name in CSV_FIELDS])


def read_run_csv(path):
    out = []
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header in {path}: {header}")
        for rec in reader:
            kwargs = {}
            for name, raw in zip(CSV_FIELDS, rec):
                if raw == "":
                    kwargs[name] = None
                elif name in _FLOAT_FIELDS:
                    kwargs[name] = float(raw)
                elif name in _INT_FIELDS:
                    kwargs[name] = int(raw)
                else:
                    kwargs[name] = raw
            out.append(IterateLog(**kwargs))
    return out
