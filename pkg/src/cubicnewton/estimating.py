"""Accumulated lower-model state driving acceleration, with closed-form argmin.

The state represents

    psi(x) = const + <S, x> + (lam + k2)/2 ||x - x0||^2 + higher power terms,

where S aggregates weighted stochastic gradients of linear models.  Two
normalizations of the power terms are used by the drivers: "plain" divides the
i-th power by i (second-order driver), "factorial" divides by i! and carries a
(p+1)-th term (tensor driver).  The minimizer reduces to a scalar radial
equation solved in closed form (p = 2) or by monotone bisection (p = 3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Degenerate, DimensionMismatch, MonotonicityViolation, NonFinite


@dataclass
class EstimatorState:
    x0: np.ndarray
    lam: float = 0.0
    kappas: tuple = (0.0, 0.0)  # (k2, k3) for p = 2; (k2, k3, k4) for p = 3
    p: int = 2
    factorial_form: bool = False
    S: np.ndarray = None
    lin_const: float = 0.0

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.S is None:
            self.S = np.zeros_like(self.x0)
        expected = self.p  # k2..k_{p+1}
        if len(self.kappas) != expected:
            raise ValueError(f"p = {self.p} needs {expected} kappa coefficients")
        if self.p == 2 and self.factorial_form:
            raise ValueError("the p = 2 driver uses the plain-i normalization")
        if self.p == 3 and not self.factorial_form:
            raise ValueError("the p = 3 driver uses the factorial normalization")
        if self.lam < 0 or min(self.kappas) < 0:
            raise ValueError("coefficients must be nonnegative")

    def accumulate(self, alpha_over_A, g_at_x_next, new_lambda, new_kappas,
                   lin_const=0.0):
        """Add one weighted linear model and replace the coefficients.

        Coefficients must not decrease; the update of psi adds coefficient
        differences, which is the same as replacing them.  `lin_const` is the
        x-independent part of the weighted linear model (diagnostic channel,
        needed only when psi values are read out).
        """
        g = np.asarray(g_at_x_next, dtype=float)
        if g.shape != self.S.shape:
            raise DimensionMismatch("gradient dimension does not match the state")
        if not np.all(np.isfinite(g)):
            raise NonFinite("aggregated gradient must be finite")
        tol = 1e-12
        if new_lambda < self.lam - tol * max(1.0, abs(self.lam)):
            raise MonotonicityViolation("lambda decreased")
        for old, new in zip(self.kappas, new_kappas):
            if new < old - tol * max(1.0, abs(old)):
                raise MonotonicityViolation("a kappa coefficient decreased")
        self.S = self.S + alpha_over_A * g
        self.lam = float(new_lambda)
        self.kappas = tuple(float(k) for k in new_kappas)
        self.lin_const += float(lin_const)
        return self

    # -- radial coefficient function c(r): grad psi(y) = c(||y-x0||)(y-x0) + S --

    def _c_of_r(self, r):
        k = self.kappas
        c0 = self.lam + k[0]
        if self.p == 2:
            return c0 + k[1] * r
        return c0 + 0.5 * k[1] * r + k[2] * r * r / 6.0

    def argmin(self):
        """Minimizer of psi, its radius, and an independent stationarity audit.

        Returns (y, r, grad_norm_check) with grad_norm_check = ||grad psi(y)||
        recomputed from y itself.
        """
        snorm = float(np.linalg.norm(self.S))
        k = self.kappas
        c0 = self.lam + k[0]
        if snorm == 0.0:
            return self.x0.copy(), 0.0, 0.0
        if c0 == 0.0 and max(k[1:]) == 0.0:
            raise Degenerate("all coefficients vanish but S != 0")
        if self.p == 2:
            k3 = k[1]
            if k3 > 0.0:
                # Root of k3 r^2 + c0 r - ||S|| = 0, written to avoid cancellation.
                disc = math.sqrt(c0 * c0 + 4.0 * k3 * snorm)
                r = 2.0 * snorm / (disc + c0)
            else:
                r = snorm / c0
        else:
            r = self._radial_bisect(snorm)
        y = self.x0 - self.S / self._c_of_r(r)
        # Independent audit: evaluate grad psi at y from scratch.
        r_y = float(np.linalg.norm(y - self.x0))
        check = float(np.linalg.norm(self._c_of_r(r_y) * (y - self.x0) + self.S))
        return y, r, check

    def _radial_bisect(self, snorm, rtol=1e-13):
        """Solve c(r) * r = ||S|| for the p = 3 coefficient polynomial.

        c(r)*r is strictly increasing, so plain bisection with a doubled
        bracket is safe; a Newton polish sharpens the root.
        """
        h = lambda r: self._c_of_r(r) * r - snorm
        hi = 1.0
        while h(hi) < 0.0:
            hi *= 2.0
            if hi > 1e300:
                raise Degenerate("radial equation has no finite root")
        lo = 0.0
        while hi - lo > rtol * hi:
            mid = 0.5 * (lo + hi)
            if h(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        r = 0.5 * (lo + hi)
        k = self.kappas
        for _ in range(3):
            hp = self._c_of_r(r) + (0.5 * k[1] + k[2] * r / 3.0) * r
            if hp <= 0.0:
                break
            r = max(r - h(r) / hp, 0.0)
        return r

    # -- psi readout (diagnostics and sandwich checks) --

    def _powers(self, r):
        k = self.kappas
        reg = 0.5 * (self.lam + k[0]) * r * r
        if self.p == 2:
            reg += k[1] * r**3 / 3.0
        else:
            reg += k[1] * r**3 / 6.0 + k[2] * r**4 / 24.0
        return reg

    def psi_value(self, x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x - self.x0))
        return self.lin_const + float(self.S @ x) + self._powers(r)

    def psi_min(self):
        y, _, _ = self.argmin()
        return self.psi_value(y)
