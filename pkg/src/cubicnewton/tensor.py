"""Accelerated stochastic tensor method at p = 3.

Same loop shape as the second-order driver, with third-order models, the
quartic-regularized subsolver, and the factorial-form estimating sequence
carrying the (p+1)-th power term.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import NoConvergence, UnsupportedOrder
from .estimating import EstimatorState
from .harness.records import IterateLog
from .problems import DENSE_TENSOR_DIM_CAP
from .subsolver import solve_tensor
from .taylor_model import TensorModel
from .ascn import RunResult

P = 3


@dataclass(frozen=True)
class ScheduleP:
    """Third-order schedule parameters (explicit proof constants, p = 3)."""

    M: float
    eta3: float = 4.0
    sigma1_over_R: float = 0.0
    sigma2: float = 0.0
    sigma3: float = 0.0
    tau: float = 1e-9
    T: int = 100
    tau_over_R: float = 0.0
    p: int = P

    def __post_init__(self):
        if self.M <= 0:
            raise ValueError("M must be positive")
        if self.eta3 < 4.0:
            raise ValueError("eta3 must be >= 4")
        if self.tau <= 0:
            raise ValueError("the tensor subsolver needs tau > 0")
        if min(self.sigma1_over_R, self.sigma2, self.sigma3, self.tau_over_R) < 0:
            raise ValueError("schedule scalars must be nonnegative")
        if self.p != P:
            raise ValueError("only p = 3 is supported")
        if self.T < 1:
            raise ValueError("iteration budget T must be >= 1")


class SchedulePointP(NamedTuple):
    alpha: float
    A: float
    kappa2_next: float
    kappa3_next: float
    kappa4_next: float
    lam: float
    delta_bar: float
    tau: float


def alpha_p_at(t):
    return (P + 1.0) / (t + P + 1.0)


def A_p_at(t):
    # prod_{j<=t} (1 - alpha_j) = 24 / ((t+1)(t+2)(t+3)(t+4)) at p = 3.
    return 24.0 / ((t + 1.0) * (t + 2.0) * (t + 3.0) * (t + 4.0))


def schedule_p_at(sched: ScheduleP, t: int) -> SchedulePointP:
    alpha = alpha_p_at(t)
    A = A_p_at(t)
    lam = sched.sigma1_over_R * (t + P + 1.0) ** (P + 0.5)
    delta_bar = 2.0 * sched.sigma2 + (
        sched.sigma1_over_R + sched.tau_over_R
    ) * (t + P + 1.0) ** 1.5
    ratio2 = alpha**2 / A
    kappa2_next = 2.0 * P * delta_bar * ratio2
    kappa3_next = (P ** 2 / 2.0) * sched.eta3 * sched.sigma3 * alpha**3 / A
    kappa4_next = ((P + 1.0) ** (P + 1) / 2.0) * sched.M * alpha**4 / A
    return SchedulePointP(alpha, A, kappa2_next, kappa3_next, kappa4_next,
                          lam, delta_bar, sched.tau)


@dataclass
class DiagRecordP:
    t: int
    alpha: float
    A: float
    lam: float
    delta_bar: float
    tau: float
    v: np.ndarray
    x_next: np.ndarray
    step_norm: float
    cert: float
    f_x_next: float
    psi_star_next: float
    lam_next: float
    kappa2_next: float
    kappa3_next: float
    kappa4_next: float


def run_tensor(problem, oracle, sched: ScheduleP, x0, *, run_id="tensor",
               seed=0, epoch=-1, test_eval: Optional[Callable] = None,
               test_every=1, collect_diagnostics=False, log_initial=True,
               subsolver_iters=5000, grad_cum0=0, hess_cum0=0, t0=0) -> RunResult:
    """Execute exactly sched.T iterations of the p = 3 method from x0."""
    if problem.d > DENSE_TENSOR_DIM_CAP:
        raise UnsupportedOrder(
            f"tensor driver needs d <= {DENSE_TENSOR_DIM_CAP} (dense order-3 tensors)"
        )
    x = np.asarray(x0, dtype=float).copy()
    y = x.copy()
    sch0 = schedule_p_at(sched, 0)
    # psi_0 coefficients: the closed-form schedule evaluated at index 0, with
    # no kappa2 term (its formula needs delta_bar at index -1).
    est = EstimatorState(
        x0=x, lam=sch0.lam,
        kappas=(
            0.0,
            (P ** 2 / 2.0) * sched.eta3 * sched.sigma3 * alpha_p_at(0) ** 3 / A_p_at(0),
            ((P + 1.0) ** (P + 1) / 2.0) * sched.M * alpha_p_at(0) ** 4 / A_p_at(0),
        ),
        p=3, factorial_form=True,
    )
    eta3_delta3 = sched.eta3 * sched.sigma3
    grad_cum, hess_cum = grad_cum0, hess_cum0
    log = []
    diags = [] if collect_diagnostics else None
    start = time.perf_counter()

    def wall_ms():
        return (time.perf_counter() - start) * 1e3

    def emit(t_label, loss, step_norm, cert, point):
        test_loss = None
        if test_eval is not None and (t_label % max(test_every, 1) == 0 or t_label == sched.T + t0):
            test_loss = float(test_eval(point))
        log.append(IterateLog(
            run_id=run_id, seed=seed, epoch=epoch, t=t_label,
            train_loss=float(loss), test_loss=test_loss,
            step_norm=float(step_norm), cert=float(cert),
            grad_samples_cum=grad_cum, hess_samples_cum=hess_cum,
            wall_ms=wall_ms(),
        ))

    if log_initial:
        emit(t0, problem.eval(x, order=0).f, 0.0, 0.0, x)

    for t in range(sched.T):
        sch = schedule_p_at(sched, t)
        v = (1.0 - sch.alpha) * x + sch.alpha * y
        out = oracle.query(v, order=3)
        grad_cum += out.grad_samples
        hess_cum += out.hess_samples
        model = TensorModel(v, 0.0, out.g, out.H, out.T3,
                            sch.delta_bar, eta3_delta3, sched.M)
        try:
            res = solve_tensor(model, sch.tau, max_iters=subsolver_iters)
        except NoConvergence as exc:
            raise NoConvergence(f"iteration {t}: {exc}") from exc
        x_next = v + res.s
        out_g = oracle.query(x_next, order=1)
        grad_cum += out_g.grad_samples

        f_next = problem.eval(x_next, order=0).f
        aoa = sch.alpha / sch.A
        sch_next = schedule_p_at(sched, t + 1)
        est.accumulate(
            aoa, out_g.g,
            new_lambda=sch_next.lam,
            new_kappas=(sch.kappa2_next, sch.kappa3_next, sch.kappa4_next),
            lin_const=aoa * (f_next - float(out_g.g @ x_next)),
        )
        y_next, _, _ = est.argmin()

        if collect_diagnostics:
            diags.append(DiagRecordP(
                t=t, alpha=sch.alpha, A=sch.A, lam=sch.lam,
                delta_bar=sch.delta_bar, tau=sch.tau, v=v,
                x_next=x_next.copy(), step_norm=res.r, cert=res.cert,
                f_x_next=f_next, psi_star_next=est.psi_min(),
                lam_next=sch_next.lam, kappa2_next=sch.kappa2_next,
                kappa3_next=sch.kappa3_next, kappa4_next=sch.kappa4_next,
            ))

        x, y = x_next, y_next
        emit(t0 + t + 1, f_next, res.r, res.cert, x)

    return RunResult(x=x, log=log, diagnostics=diags)
