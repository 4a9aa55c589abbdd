"""Regularized (inexact) Taylor models and their values/gradients.

The second-order model is

    m(y) = f_x + <g, y-x> + 0.5 <y-x, H (y-x)> + (delta/2)||y-x||^2 + (M/6)||y-x||^3

and the third-order model adds the cubic Taylor term, a third-order error
regularizer with coefficient eta3*delta3, and a quartic regularizer
(p*M/(p+1)! = M/8 at p = 3).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch


def _check_sym(A, name):
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > 1e-12 * scale:
        raise ValueError(f"{name} must be symmetric")


def _disp(model, y):
    y = np.asarray(y, dtype=float)
    if y.shape != model.x.shape:
        raise DimensionMismatch("y must match the model anchor dimension")
    return y - model.x


@dataclass
class CubicModel:
    """Quadratic model with quadratic + cubic regularization around anchor x."""

    x: np.ndarray
    f_x: float
    g: np.ndarray
    H: np.ndarray
    delta_bar: float
    M: float

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        d = self.x.shape[0]
        if self.g.shape != (d,) or self.H.shape != (d, d):
            raise DimensionMismatch("g and H must match the anchor dimension")
        _check_sym(self.H, "H")
        if self.delta_bar < 0 or self.M < 0:
            raise ValueError("delta_bar and M must be nonnegative")

    def value(self, y):
        s = _disp(self, y)
        r = np.linalg.norm(s)
        return float(
            self.f_x
            + self.g @ s
            + 0.5 * s @ (self.H @ s)
            + 0.5 * self.delta_bar * r**2
            + self.M / 6.0 * r**3
        )

    def grad(self, y):
        s = _disp(self, y)
        r = np.linalg.norm(s)
        return self.g + self.H @ s + (self.delta_bar + 0.5 * self.M * r) * s


@dataclass
class TensorModel:
    """Third-order model (p = 3) with error regularizers and quartic term."""

    x: np.ndarray
    f_x: float
    g: np.ndarray
    H: np.ndarray
    T3: np.ndarray
    delta_bar: float
    eta3_delta3: float  # only the product eta3 * delta3 enters the model
    M: float
    p: int = 3

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        self.T3 = np.asarray(self.T3, dtype=float)
        d = self.x.shape[0]
        if self.g.shape != (d,) or self.H.shape != (d, d) or self.T3.shape != (d, d, d):
            raise DimensionMismatch("g/H/T3 must match the anchor dimension")
        _check_sym(self.H, "H")
        if self.p != 3:
            raise ValueError("only p = 3 is supported")
        if min(self.delta_bar, self.eta3_delta3, self.M) < 0:
            raise ValueError("regularization coefficients must be nonnegative")

    def _t3_mat(self, s):
        # One dense contraction T3[s] -> matrix; fine at desk scale (d <= 64).
        return np.tensordot(self.T3, s, axes=([2], [0]))

    def value(self, y):
        s = _disp(self, y)
        r = np.linalg.norm(s)
        Ts = self._t3_mat(s)
        return float(
            self.f_x
            + self.g @ s
            + 0.5 * s @ (self.H @ s)
            + (s @ (Ts @ s)) / 6.0
            + 0.5 * self.delta_bar * r**2
            + self.eta3_delta3 / 6.0 * r**3
            + self.M / 8.0 * r**4  # p*M/(p+1)! at p = 3
        )

    def grad(self, y):
        s = _disp(self, y)
        r = np.linalg.norm(s)
        Ts = self._t3_mat(s)
        return (
            self.g
            + self.H @ s
            + 0.5 * (Ts @ s)
            + (self.delta_bar + 0.5 * self.eta3_delta3 * r + 0.5 * self.M * r**2) * s
        )


def model_value(model, y):
    return model.value(y)


def model_grad(model, y):
    return model.grad(y)
