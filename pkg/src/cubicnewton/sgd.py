"""Constant-step SGD baseline sharing the oracle and logging interfaces."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ascn import RunResult
from .errors import NonFinite
from .harness.records import IterateLog

DIVERGENCE_CAP = 1e12


@dataclass(frozen=True)
class SgdConfig:
    lr: float
    T: int = 100
    batch: int = 1

    def __post_init__(self):
        if self.lr < 0:
            raise ValueError("lr must be nonnegative")
        if self.T < 1 or self.batch < 1:
            raise ValueError("T and batch must be positive")


def run_sgd(problem, oracle, cfg: SgdConfig, x0, *, run_id="sgd", seed=0,
            test_eval: Optional[Callable] = None, test_every=1,
            log_initial=True) -> RunResult:
    """x_{t+1} = x_t - lr * g(x_t, xi); aborts if the loss exceeds 1e12.

    The minibatch size lives in the oracle; cfg.batch is what the harness used
    to build it and is kept for the record.
    """
    x = np.asarray(x0, dtype=float).copy()
    grad_cum = 0
    log = []
    start = time.perf_counter()

    def emit(t, loss, step_norm):
        test_loss = None
        if test_eval is not None and (t % max(test_every, 1) == 0 or t == cfg.T):
            test_loss = float(test_eval(x))
        log.append(IterateLog(
            run_id=run_id, seed=seed, epoch=-1, t=t, train_loss=float(loss),
            test_loss=test_loss, step_norm=float(step_norm), cert=0.0,
            grad_samples_cum=grad_cum, hess_samples_cum=0,
            wall_ms=(time.perf_counter() - start) * 1e3,
        ))

    if log_initial:
        emit(0, problem.eval(x, order=0).f, 0.0)
    for t in range(cfg.T):
        out = oracle.query(x, order=1)
        grad_cum += out.grad_samples
        step = cfg.lr * out.g
        x = x - step
        f = problem.eval(x, order=0).f
        if not np.isfinite(f) or f > DIVERGENCE_CAP:
            raise NonFinite(
                f"SGD diverged at iteration {t}: f = {f:.3e} (lr too large?)"
            )
        emit(t + 1, f, float(np.linalg.norm(step)))
    return RunResult(x=x, log=log)
