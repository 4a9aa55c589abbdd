from .config import ExperimentConfig, build_x0, parse_config
from .csvlog import read_run_csv, write_run_csv
from .experiment import (
    build_oracle,
    build_problem,
    build_schedule2,
    build_schedule_p,
    execute_run,
    loss_at_budget,
    run_experiment,
    summarize_run_dir,
)
from .libsvm import Dataset, parse_libsvm, serialize_libsvm, split
from .records import CSV_FIELDS, IterateLog

__all__ = [
    "CSV_FIELDS",
    "Dataset",
    "ExperimentConfig",
    "IterateLog",
    "build_oracle",
    "build_problem",
    "build_schedule2",
    "build_schedule_p",
    "build_x0",
    "execute_run",
    "loss_at_budget",
    "parse_config",
    "parse_libsvm",
    "read_run_csv",
    "run_experiment",
    "serialize_libsvm",
    "split",
    "summarize_run_dir",
    "write_run_csv",
]
