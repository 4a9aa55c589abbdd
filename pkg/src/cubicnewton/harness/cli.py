"""Command-line entry point: run / parse / summarize."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from ..errors import CubicNewtonError
from .config import parse_config
from .experiment import run_experiment, summarize_run_dir
from .libsvm import parse_libsvm

OUT_DIR_ENV = "CUBICNEWTON_OUT_DIR"


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cubicnewton",
        description="Benchmark harness for accelerated stochastic cubic Newton "
                    "and tensor methods",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to the experiment config file")
    p_run.add_argument("--seeds", help="comma list overriding [experiment] seeds")
    p_run.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or ./runs)")
    p_run.add_argument("--threads", type=int, default=1,
                       help="seeds to run concurrently")

    p_parse = sub.add_parser("parse", help="parse a LibSVM file")
    p_parse.add_argument("path")
    p_parse.add_argument("--stats", action="store_true",
                         help="print dataset statistics")

    p_sum = sub.add_parser("summarize", help="rebuild summary.ini from run CSVs")
    p_sum.add_argument("run_dir")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_config(args.config)
            if args.seeds:
                cfg.seeds = [int(tok) for tok in args.seeds.replace(",", " ").split()]
            out_dir = (args.out_dir or cfg.out_dir
                       or os.environ.get(OUT_DIR_ENV) or "runs")
            code, summary = run_experiment(cfg, out_dir, threads=max(args.threads, 1))
            print(summary)
            return code
        if args.command == "parse":
            dataset = parse_libsvm(args.path, name=os.path.basename(args.path))
            print(f"rows: {dataset.n}")
            print(f"dimension: {dataset.d}")
            if args.stats:
                pos = int(np.sum(dataset.labels > 0))
                nnz = dataset.features.nnz
                print(f"positive labels: {pos}")
                print(f"negative labels: {dataset.n - pos}")
                print(f"nonzeros: {nnz}")
                print(f"density: {nnz / (dataset.n * dataset.d):.6f}")
            return 0
        summary = summarize_run_dir(args.run_dir)
        print(summary)
        return 0
    except CubicNewtonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
