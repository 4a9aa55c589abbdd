"""Test objectives with exact derivatives up to order 3 and known smoothness constants.

Every oracle in this package sits on top of one of these problems, so the
derivatives here are the ground truth for all inexactness measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import expit

from .errors import DimensionMismatch, NonFinite, UnsupportedOrder

# Dense order-3 tensors are only materialized at desk scale.
DENSE_TENSOR_DIM_CAP = 64

# Uniform bounds on sigmoid derivatives, used for Lipschitz constants of the
# logistic loss.  max|sigma''| is attained at sigma = (3 - sqrt(3))/6 and equals
# 1/(6*sqrt(3)); max|sigma'''| is attained at z = 0 and equals 1/8.  Both values
# are pinned by a grid+refine test in the suite.
SIGMOID_D2_MAX = 1.0 / (6.0 * math.sqrt(3.0))
SIGMOID_D3_MAX = 0.125


class EvalResult(NamedTuple):
    f: float
    grad: Optional[np.ndarray]
    hess: Optional[np.ndarray]
    third: Optional[np.ndarray]


@dataclass(frozen=True)
class SmoothnessConstants:
    """Lipschitz constants of the first three derivatives plus strong convexity."""

    L1: float
    L2: float
    L3: float
    mu: float

    def __post_init__(self):
        if min(self.L1, self.L2, self.L3, self.mu) < 0:
            raise ValueError("smoothness constants must be nonnegative")
        if self.mu > self.L1 + 1e-12 * max(1.0, self.L1):
            raise ValueError("mu cannot exceed L1")


def _check_point(x, d):
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise DimensionMismatch(f"expected point of shape ({d},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFinite("query point contains non-finite entries")
    return x


def _check_order(order, d, have_third):
    if order not in (0, 1, 2, 3):
        raise UnsupportedOrder(f"order must be in 0..3, got {order}")
    if order == 3:
        if not have_third:
            raise UnsupportedOrder("problem does not expose a third derivative")
        if d > DENSE_TENSOR_DIM_CAP:
            raise UnsupportedOrder(
                f"dense order-3 tensor requires d <= {DENSE_TENSOR_DIM_CAP}, got d={d}"
            )


class QuadraticProblem:
    """f(x) = 0.5 x'Ax - b'x with A symmetric PSD.

    The Hessian is constant, so this is the canonical fixture with a
    0-Lipschitz-continuous Hessian (L2 = L3 = 0).
    """

    def __init__(self, A, b, x_star=None):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch("A must be square")
        if b.shape != (A.shape[0],):
            raise DimensionMismatch("b must match A")
        asym = np.max(np.abs(A - A.T))
        if asym > 1e-12 * max(1.0, np.max(np.abs(A))):
            raise ValueError("A must be symmetric to 1e-12 relative tolerance")
        self.A = 0.5 * (A + A.T)
        self.b = b
        self.d = b.shape[0]
        self.n_samples = 1
        if x_star is not None:
            x_star = np.asarray(x_star, dtype=float)
            resid = np.linalg.norm(self.A @ x_star - b)
            if resid > 1e-8 * (1.0 + np.linalg.norm(b)):
                raise ValueError("supplied x_star does not solve A x = b")
        self.x_star = x_star

    def eval(self, x, order=1, subset=None):
        x = _check_point(x, self.d)
        _check_order(order, self.d, have_third=True)
        # A quadratic is a single "sample": any subset is the full objective.
        Ax = self.A @ x
        f = float(0.5 * x @ Ax - self.b @ x)
        grad = Ax - self.b if order >= 1 else None
        hess = self.A.copy() if order >= 2 else None
        third = np.zeros((self.d,) * 3) if order >= 3 else None
        return EvalResult(f, grad, hess, third)

    def smoothness(self):
        evals = np.linalg.eigvalsh(self.A)
        return SmoothnessConstants(
            L1=float(evals[-1]), L2=0.0, L3=0.0, mu=float(max(evals[0], 0.0))
        )

    def minimizer(self):
        if self.x_star is not None:
            return np.asarray(self.x_star, dtype=float)
        return np.linalg.solve(self.A, self.b)


class LogisticProblem:
    """Averaged logistic loss (1/n) sum_i log(1 + exp(-b_i a_i'x)) + (mu/2)||x||^2."""

    def __init__(self, features, labels, l2_reg=0.0):
        X = np.asarray(features, dtype=float)
        y = np.asarray(labels, dtype=float)
        if X.ndim != 2:
            raise DimensionMismatch("features must be a 2-d matrix")
        n, d = X.shape
        if n < 1 or d < 1:
            raise ValueError("need n >= 1 and d >= 1")
        if y.shape != (n,):
            raise DimensionMismatch("labels must have one entry per row")
        if not np.all(np.isfinite(X)):
            raise NonFinite("feature rows must be finite")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be in {-1, +1}")
        if l2_reg < 0:
            raise ValueError("l2_reg must be nonnegative")
        self.X = X
        self.y = y
        self.l2_reg = float(l2_reg)
        self.n_samples = n
        self.d = d

    def _rows(self, subset):
        if subset is None:
            return self.X, self.y
        idx = np.asarray(subset, dtype=int)
        if idx.size == 0:
            raise ValueError("subset must be nonempty")
        if idx.min() < 0 or idx.max() >= self.n_samples:
            raise IndexError("subset indices out of range")
        return self.X[idx], self.y[idx]

    def eval(self, x, order=1, subset=None):
        x = _check_point(x, self.d)
        _check_order(order, self.d, have_third=True)
        X, y = self._rows(subset)
        m = X.shape[0]
        z = y * (X @ x)  # margins
        # Stable branchless form: log(1 + exp(-z)) = max(0,-z) + log1p(exp(-|z|)).
        losses = np.maximum(-z, 0.0) + np.log1p(np.exp(-np.abs(z)))
        mu = self.l2_reg
        f = float(losses.mean() + 0.5 * mu * (x @ x))
        grad = hess = third = None
        if order >= 1:
            # d/dz log(1+e^-z) = -expit(-z)
            p = expit(-z)
            grad = -(X.T @ (p * y)) / m + mu * x
        if order >= 2:
            w = expit(z) * expit(-z)  # sigma'(z), stable for large |z|
            hess = (X.T * w) @ X / m + mu * np.eye(self.d)
        if order >= 3:
            # third derivative of log(1+e^-z) is sigma''(z) = w*(1-2*sigma(z))
            c = expit(z) * expit(-z) * (1.0 - 2.0 * expit(z)) * y
            third = np.einsum("i,ij,ik,il->jkl", c, X, X, X) / m
        return EvalResult(f, grad, hess, third)

    def smoothness(self):
        row_norms = np.linalg.norm(self.X, axis=1)
        a = float(row_norms.max()) if row_norms.size else 0.0
        mu = self.l2_reg
        return SmoothnessConstants(
            L1=0.25 * a**2 + mu,
            L2=SIGMOID_D2_MAX * a**3,
            L3=SIGMOID_D3_MAX * a**4,
            mu=mu,
        )


def evaluate(problem, x, order=1, subset=None):
    """Functional spelling of problem.eval for callers that prefer it."""
    return problem.eval(x, order=order, subset=subset)


def constants(problem) -> SmoothnessConstants:
    return problem.smoothness()


def make_random_quadratic(d, cond=10.0, seed=0, mu_min=1.0):
    """Random strongly convex quadratic with eigenvalues in [mu_min, mu_min*cond]."""
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    evals = np.geomspace(mu_min, mu_min * cond, d)
    A = (Q * evals) @ Q.T
    A = 0.5 * (A + A.T)
    x_star = rng.normal(size=d)
    return QuadraticProblem(A, A @ x_star, x_star=x_star)


def make_synthetic_logistic(n, d, seed=0, l2_reg=0.0, flip_prob=0.05,
                            col_spread=1.0):
    """Separable-ish logistic instance with a planted direction and label noise.

    col_spread > 1 rescales feature columns geometrically over
    [1/col_spread, col_spread], producing ill-conditioned instances.
    """
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d)) / math.sqrt(d)
    if col_spread != 1.0:
        X = X * np.geomspace(1.0 / col_spread, col_spread, d)
    x_true = rng.normal(size=d)
    y = np.sign(X @ x_true + 0.1 * rng.normal(size=n))
    y[y == 0] = 1.0
    flips = rng.random(n) < flip_prob
    y[flips] *= -1.0
    return LogisticProblem(X, y, l2_reg=l2_reg)


def reference_minimum(problem, iters=10_000):
    """High-precision reference solve: LBFGS capped at `iters`, then Newton polish.

    Returns (x_star, f_star).  Deterministic; used as the f* oracle in tests and
    summaries, never by the solvers themselves.
    """
    from scipy.optimize import minimize

    d = problem.d
    x0 = np.zeros(d)

    def fg(x):
        r = problem.eval(x, order=1)
        return r.f, r.grad

    res = minimize(fg, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": iters, "gtol": 1e-14, "ftol": 0.0})
    x = res.x
    # A few damped Newton steps drive the gradient to machine precision.
    for _ in range(50):
        r = problem.eval(x, order=2)
        gnorm = np.linalg.norm(r.grad)
        if gnorm <= 1e-14 * (1.0 + abs(r.f)):
            break
        H = r.hess + 1e-12 * np.eye(d)
        step = np.linalg.solve(H, r.grad)
        t = 1.0
        while problem.eval(x - t * step, order=0).f > r.f and t > 1e-8:
            t *= 0.5
        x = x - t * step
    return x, problem.eval(x, order=0).f
