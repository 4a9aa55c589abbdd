"""Certified inexact minimizers of the regularized Taylor models.

Every solve returns the step together with the verifiable certificate
cert = ||grad of the model at the step||, which the caller can replay
independently.  Two backends: an eigendecomposition "secular" path that is
near-exact (used for d <= 512), and a first-order descent fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NonFinite
from .taylor_model import CubicModel, TensorModel

SECULAR_DIM_CAP = 512
_EPS = np.finfo(float).eps
# The hard-case split: gradient components on the bottom eigenspace below this
# relative size are treated as exactly orthogonal (Moré–Sorensen-style safeguard).
_HARD_CASE_RTOL = 1e-12


@dataclass
class SubsolveResult:
    s: np.ndarray
    cert: float
    r: float
    inner_iters: int
    method_used: str


def _certificate_floor(model, r, hnorm=None):
    """Floating-point floor used when tau = 0 is requested on the secular path.

    Besides the model-magnitude terms, the floor carries an anchor-roundoff
    term: the certificate is evaluated at y = x + s, and forming y rounds at
    eps * ||x||, which dominates once the step is much smaller than the anchor.
    """
    if hnorm is None:
        hnorm = float(np.linalg.norm(model.H, 2)) if model.H.size else 0.0
    curv = hnorm + model.delta_bar + model.M * r
    scale = (
        float(np.linalg.norm(model.g))
        + (hnorm + model.delta_bar) * r
        + 0.5 * model.M * r * r
        + curv * float(np.linalg.norm(model.x))
    )
    return 64.0 * _EPS * max(scale, 1e-300)


def solve_cubic(model: CubicModel, tau, *, max_scalar_iters=200, backend=None):
    """tau-inexact minimizer of the cubic-regularized quadratic model.

    The secular backend eigendecomposes H, reduces the stationarity system to a
    scalar root-find in the step radius, and resolves the hard case with a
    bottom-eigenvector correction.  tau = 0 is mapped to a machine-precision
    floor (exact solves are impossible in floating point).
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if model.M <= 0:
        raise ValueError("M must be positive")
    d = model.g.shape[0]
    if backend is None:
        backend = "secular" if d <= SECULAR_DIM_CAP else "iterative"
    if backend == "secular":
        return _solve_cubic_secular(model, tau, max_scalar_iters)
    if backend == "iterative":
        if tau <= 0:
            raise ValueError("the iterative backend needs tau > 0")
        return _solve_cubic_iterative(model, tau)
    raise ValueError(f"unknown backend {backend!r}")


def _solve_cubic_secular(model, tau, max_scalar_iters):
    g, delta, M = model.g, model.delta_bar, model.M
    evals, Q = np.linalg.eigh(model.H)
    ghat = Q.T @ g
    gnorm = float(np.linalg.norm(g))
    lam_min = float(evals[0])
    hnorm = float(max(abs(evals[0]), abs(evals[-1])))
    r_lb = max(0.0, 2.0 * (-(lam_min + delta)) / M)
    iters = 0

    def finish(s_hat, polishable=True):
        s = Q @ s_hat
        cert = float(np.linalg.norm(model.grad(model.x + s)))
        r = float(np.linalg.norm(s))
        target = max(tau, _certificate_floor(model, r, hnorm))
        rounds = 0
        while cert > target and polishable and rounds < 4:
            s = _newton_polish(model, evals, Q, s)
            cert = float(np.linalg.norm(model.grad(model.x + s)))
            r = float(np.linalg.norm(s))
            target = max(tau, _certificate_floor(model, r, hnorm))
            rounds += 1
        if cert > target:
            raise NoConvergence(
                f"secular subsolver certificate {cert:.3e} above target {target:.3e}"
            )
        if not np.all(np.isfinite(s)):
            raise NonFinite("subsolver produced a non-finite step")
        return SubsolveResult(s=s, cert=cert, r=r, inner_iters=iters, method_used="secular")

    # Anchor already stationary: zero gradient and H + delta*I PSD.
    if gnorm == 0.0 and r_lb == 0.0:
        return finish(np.zeros_like(ghat), polishable=False)

    bottom = evals - lam_min <= 1e-12 * max(1.0, abs(lam_min))
    g_bot = float(np.linalg.norm(ghat[bottom]))

    if r_lb > 0.0 and g_bot <= _HARD_CASE_RTOL * max(gnorm, 1e-300):
        # Gradient (numerically) orthogonal to the bottom eigenspace: the
        # positive-shift branch may have no interior root.  Build the boundary
        # solution with an eigenvector correction when it applies.
        den = evals + delta + 0.5 * M * r_lb
        s_hat = np.zeros_like(ghat)
        np.divide(-ghat, den, out=s_hat, where=~bottom)
        inner = float(np.linalg.norm(s_hat))
        if inner <= r_lb:
            theta = math.sqrt(max(r_lb * r_lb - inner * inner, 0.0))
            s_hat[np.argmax(bottom)] += theta
            return finish(s_hat, polishable=False)
        # Otherwise the interior root exists beyond r_lb; fall through.

    def phi(r):
        den = evals + delta + 0.5 * M * r
        if np.any(den <= 0.0):
            return np.inf, -np.inf
        w = ghat / den
        sn = float(np.linalg.norm(w))
        if sn == 0.0:
            return -r, -1.0
        dsn = -0.5 * M * float(np.sum(w * w / den)) / sn
        return sn - r, dsn - 1.0

    # phi is strictly decreasing on (r_lb, inf) and the root satisfies
    # r* <= r_lb + sqrt(2||g||/M).
    lo = r_lb
    hi = r_lb + math.sqrt(2.0 * gnorm / M) * (1.0 + 1e-12) + 1e-300
    while phi(hi)[0] > 0.0:
        hi = r_lb + 2.0 * (hi - r_lb)
        iters += 1
        if iters > max_scalar_iters:
            raise NoConvergence("could not bracket the secular root")

    r = hi
    for _ in range(max_scalar_iters - iters):
        iters += 1
        val, dval = phi(r)
        if val > 0.0:
            lo = r
        else:
            hi = r
        if hi - lo <= 4.0 * _EPS * max(1.0, hi):
            break
        r_newton = r - val / dval if (np.isfinite(val) and dval < 0.0) else None
        if r_newton is None or not (lo < r_newton < hi):
            r_newton = 0.5 * (lo + hi)
        r = r_newton
    else:
        raise NoConvergence(f"secular root-find hit the {max_scalar_iters}-step cap")

    r = 0.5 * (lo + hi) if hi > lo else hi
    den = evals + delta + 0.5 * M * r
    s_hat = np.zeros_like(ghat)
    np.divide(-ghat, den, out=s_hat, where=den > 0.0)
    return finish(s_hat)


def _newton_polish(model, evals, Q, s):
    """One Newton step on the stationarity system, via eigenbasis + rank-1 solve."""
    r = float(np.linalg.norm(s))
    resid = model.grad(model.x + s)
    den = evals + model.delta_bar + 0.5 * model.M * r
    if np.min(den) <= 0.0 or r == 0.0:
        return s
    rhat = Q.T @ resid
    shat = Q.T @ s
    # Jacobian in the eigenbasis: diag(den) + (M/(2r)) shat shat'; Sherman-Morrison.
    u = shat / den
    alpha = 0.5 * model.M / r
    corr = rhat / den - u * (alpha * (u @ rhat)) / (1.0 + alpha * (shat @ u))
    return s - Q @ corr


def _descent(value, grad, s0, tau, max_iters, lip0):
    """Monotone gradient descent with Armijo backtracking (factor 0.5, c = 1e-4).

    The initial trial step per iteration uses a Barzilai-Borwein estimate when
    available, safeguarded by the backtracking loop.
    """
    s = np.array(s0, dtype=float)
    f = value(s)
    # Sufficient-decrease comparisons are meaningless below the rounding
    # resolution of the model value; allow that much noise so the line search
    # does not reject honest steps once ||grad|| is tiny.
    f_noise = 64.0 * _EPS * (abs(f) + 1e-300)
    step = 1.0 / max(lip0, 1e-12)
    g_prev = None
    s_prev = None
    for it in range(max_iters):
        g = grad(s)
        gn = float(np.linalg.norm(g))
        if gn <= tau:
            return s, gn, it
        if g_prev is not None:
            ds = s - s_prev
            dy = g - g_prev
            denom = float(ds @ dy)
            if denom > 0.0:
                step = min(max(float(ds @ ds) / denom, 1e-14), 1e14)
        s_prev, g_prev = s, g
        decrease = 1e-4 * gn * gn
        for _ in range(60):
            cand = s - step * g
            f_cand = value(cand)
            if f_cand <= f - step * decrease + f_noise:
                break
            step *= 0.5
        else:
            raise NoConvergence("backtracking line search stalled")
        s, f = cand, f_cand
        f_noise = max(f_noise, 64.0 * _EPS * abs(f))
        step *= 2.0
    g = grad(s)
    gn = float(np.linalg.norm(g))
    if gn <= tau:
        return s, gn, max_iters
    raise NoConvergence(
        f"descent subsolver did not certify within {max_iters} iterations "
        f"(||grad|| = {gn:.3e}, tau = {tau:.3e})"
    )


def _solve_cubic_iterative(model, tau, max_iters=20_000):
    d = model.g.shape[0]
    lip0 = (
        float(np.linalg.norm(model.H, "fro"))
        + model.delta_bar
        + model.M * math.sqrt(2.0 * float(np.linalg.norm(model.g)) / model.M)
    )

    def value(s):
        return model.value(model.x + s)

    def grad(s):
        return model.grad(model.x + s)

    s, cert, iters = _descent(value, grad, np.zeros(d), tau, max_iters, lip0)
    return SubsolveResult(
        s=s, cert=cert, r=float(np.linalg.norm(s)), inner_iters=iters,
        method_used="iterative",
    )


def solve_tensor(model: TensorModel, tau, max_iters=5000):
    """tau-inexact minimizer of the third-order regularized model.

    Warm-starts from the cubic solve of the quadratic part (same delta_bar,
    with the third-order regularizer folded into the cubic coefficient), then
    runs the certified first-order descent on the full model.
    """
    if tau <= 0:
        raise ValueError("solve_tensor needs tau > 0")
    if model.M <= 0:
        raise ValueError("M must be positive")
    surrogate = CubicModel(
        x=model.x,
        f_x=model.f_x,
        g=model.g,
        H=model.H,
        delta_bar=model.delta_bar,
        M=model.M + model.eta3_delta3,
    )
    warm = solve_cubic(surrogate, tau=max(tau, 1e-12))
    s0 = warm.s
    # Keep the anchor as a fallback start so the certified point never sits
    # above the model value at the anchor.
    if model.value(model.x + s0) > model.f_x:
        s0 = np.zeros_like(s0)
    r0 = float(np.linalg.norm(s0))
    lip0 = (
        float(np.linalg.norm(model.H, "fro"))
        + float(np.linalg.norm(model.T3)) * (r0 + 1.0)
        + model.delta_bar
        + model.eta3_delta3 * (r0 + 1.0)
        + model.M * (r0 + 1.0) ** 2
    )

    def value(s):
        return model.value(model.x + s)

    def grad(s):
        return model.grad(model.x + s)

    s, cert, iters = _descent(value, grad, s0, tau, max_iters, lip0)
    if not np.all(np.isfinite(s)):
        raise NonFinite("tensor subsolver produced a non-finite step")
    return SubsolveResult(
        s=s, cert=cert, r=float(np.linalg.norm(s)),
        inner_iters=iters + warm.inner_iters, method_used="iterative",
    )
