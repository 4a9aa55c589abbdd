"""Per-iteration log record shared by every driver and the CSV layer."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass
class IterateLog:
    run_id: str
    seed: int
    epoch: int  # -1 for non-restarted runs
    t: int
    train_loss: float
    test_loss: float | None
    step_norm: float
    cert: float
    grad_samples_cum: int
    hess_samples_cum: int
    wall_ms: float


CSV_FIELDS = tuple(f.name for f in fields(IterateLog))
