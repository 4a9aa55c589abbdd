"""Inexact first/second/third-order feedback over a problem.

Three oracle flavors: exact, minibatch (independent index sets for gradient and
Hessian), and additive Gaussian noise with calibrated scales.  All stochastic
oracles are deterministic given (seed, query counter).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFinite, UnsupportedOrder, ZeroDirection

GRAD, GRAD_HESS, GRAD_HESS_THIRD = 1, 2, 3


@dataclass
class OracleOutput:
    g: np.ndarray
    H: np.ndarray | None = None
    T3: np.ndarray | None = None
    grad_samples: int = 1
    hess_samples: int = 0

    def __post_init__(self):
        if not np.all(np.isfinite(self.g)):
            raise NonFinite("stochastic gradient is not finite")
        if self.H is not None:
            scale = max(1.0, float(np.max(np.abs(self.H))))
            if np.max(np.abs(self.H - self.H.T)) > 1e-12 * scale:
                raise ValueError("Hessian estimate must be symmetric to 1e-12")


@dataclass(frozen=True)
class NoiseSpec:
    sigma1: float = 0.0
    sigma2: float = 0.0
    sigma3: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if min(self.sigma1, self.sigma2, self.sigma3) < 0:
            raise ValueError("noise scales must be nonnegative")


@dataclass(frozen=True)
class BatchSpec:
    grad_batch: int
    hess_batch: int
    seed: int = 0
    with_replacement: bool = False

    def __post_init__(self):
        if self.grad_batch < 1 or self.hess_batch < 1:
            raise ValueError("batch sizes must be positive")


class ExactOracle:
    """Returns the true derivatives; cost counters are 1 per requested derivative."""

    def __init__(self, problem):
        self.problem = problem

    def query(self, x, order=GRAD_HESS):
        r = self.problem.eval(x, order=order)
        return OracleOutput(
            g=r.grad,
            H=r.hess,
            T3=r.third,
            grad_samples=1,
            hess_samples=1 if order >= GRAD_HESS else 0,
        )


class MinibatchOracle:
    """Subset-averaged derivatives with independently drawn gradient/Hessian batches.

    Index sets are drawn fresh on every query; gradient and Hessian sets are
    independent of each other, matching experiment setups that use different
    batch sizes for the two.  The third derivative, when requested, is averaged
    over the Hessian index set.
    """

    def __init__(self, problem, batch: BatchSpec):
        n = problem.n_samples
        if not batch.with_replacement and (batch.grad_batch > n or batch.hess_batch > n):
            raise ValueError("batch sizes cannot exceed n without replacement")
        self.problem = problem
        self.batch = batch
        self._rng = np.random.default_rng(batch.seed)
        self.queries = 0

    def _draw(self, size):
        n = self.problem.n_samples
        if self.batch.with_replacement:
            return self._rng.integers(0, n, size=size)
        return self._rng.choice(n, size=size, replace=False)

    def query(self, x, order=GRAD_HESS):
        if order < GRAD:
            raise UnsupportedOrder("oracle queries must request at least the gradient")
        self.queries += 1
        r1, r2 = self.batch.grad_batch, self.batch.hess_batch
        idx_g = self._draw(r1)
        g = self.problem.eval(x, order=GRAD, subset=idx_g).grad
        H = T3 = None
        hess_cost = 0
        if order >= GRAD_HESS:
            idx_h = self._draw(r2)
            rh = self.problem.eval(x, order=order, subset=idx_h)
            H, T3 = rh.hess, rh.third
            hess_cost = r2
        return OracleOutput(g=g, H=H, T3=T3, grad_samples=r1, hess_samples=hess_cost)


def _symmetrize3(T):
    perms = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))
    return sum(np.transpose(T, p) for p in perms) / 6.0


class AdditiveNoiseOracle:
    """True derivatives plus isotropic Gaussian noise with calibrated scales.

    Gradient noise: sigma1 * z/sqrt(d) with z standard normal, so the noise
    second moment is exactly sigma1^2.  Hessian noise: sigma2 * W with
    W = (G + G')/2 / c_d and c_d a Monte-Carlo estimate (200 draws at
    construction) of E||(G+G')/2||_2, so the realized spectral deviation is
    approximately the configured sigma2.  Third-derivative noise follows the
    same recipe with a symmetrized Gaussian tensor calibrated in Frobenius
    norm (an upper bound on the induced tensor norm).
    """

    _spectral_cal = {}  # per-dimension c_d cache, keyed by (d, seed)

    def __init__(self, problem, noise: NoiseSpec):
        self.problem = problem
        self.noise = noise
        self._rng = np.random.default_rng(noise.seed)
        self.queries = 0
        d = problem.d
        key = (d, noise.seed)
        if key not in self._spectral_cal:
            cal_rng = np.random.default_rng((noise.seed, d, 0xC0FFEE))
            draws = []
            for _ in range(200):
                G = cal_rng.normal(size=(d, d))
                draws.append(np.linalg.norm(0.5 * (G + G.T), 2))
            self._spectral_cal[key] = float(np.mean(draws))
        self._c_d = self._spectral_cal[key]
        # E||sym(T)||_F for the tensor noise, computed in closed form would need
        # the permutation overlap structure; a small Monte-Carlo estimate keeps
        # the calibration honest and cheap.
        self._c3_d = None
        if d <= 64:
            cal_rng = np.random.default_rng((noise.seed, d, 0x7E5045))
            draws = [
                np.linalg.norm(_symmetrize3(cal_rng.normal(size=(d, d, d))))
                for _ in range(32)
            ]
            self._c3_d = float(np.mean(draws))

    def query(self, x, order=GRAD_HESS):
        if order < GRAD:
            raise UnsupportedOrder("oracle queries must request at least the gradient")
        self.queries += 1
        r = self.problem.eval(x, order=order)
        d = self.problem.d
        g = r.grad + self.noise.sigma1 * self._rng.normal(size=d) / np.sqrt(d)
        H = T3 = None
        if order >= GRAD_HESS:
            G = self._rng.normal(size=(d, d))
            H = r.hess + self.noise.sigma2 * 0.5 * (G + G.T) / self._c_d
            if order >= GRAD_HESS_THIRD:
                T = self._rng.normal(size=(d, d, d))
                T3 = r.third + self.noise.sigma3 * _symmetrize3(T) / self._c3_d
        return OracleOutput(
            g=g, H=H, T3=T3, grad_samples=1, hess_samples=1 if order >= GRAD_HESS else 0
        )


def delta2_along(oracle_output, problem, x, y):
    """Realized directional Hessian error ||(H - f''(x))(y-x)|| / ||y-x||.

    Diagnostic quantity for invariant suites; the solvers never see it.
    """
    if oracle_output.H is None:
        raise ValueError("oracle output carries no Hessian")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch("x and y must have the same shape")
    direction = y - x
    nrm = np.linalg.norm(direction)
    if nrm == 0.0:
        raise ZeroDirection("y must differ from x")
    H_true = problem.eval(x, order=GRAD_HESS).hess
    return float(np.linalg.norm((oracle_output.H - H_true) @ direction) / nrm)
