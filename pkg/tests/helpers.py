"""Shared numerical oracles for the test suite (finite differences, brute force).

These stay independent of the code paths they check: finite differences for
derivatives, multi-start first-order descent for subproblem minima, and plain
long-double resummation for model values.
"""

import numpy as np
from scipy.optimize import minimize


def fd_gradient(f, x, h):
    d = len(x)
    g = np.zeros(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_jacobian(vec_fn, x, h):
    """Central differences of a vector field; symmetrized for Hessian checks."""
    d = len(x)
    J = np.zeros((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        J[:, i] = (vec_fn(x + e) - vec_fn(x - e)) / (2.0 * h)
    return 0.5 * (J + J.T)


def grid_refine_max(fn, lo, hi, rounds=8, points=2001):
    """Maximize |fn| on [lo, hi] by repeated grid refinement."""
    for _ in range(rounds):
        zs = np.linspace(lo, hi, points)
        vals = np.abs(fn(zs))
        k = int(np.argmax(vals))
        width = (hi - lo) / (points - 1)
        lo, hi = zs[k] - 2 * width, zs[k] + 2 * width
    return float(np.max(np.abs(fn(np.linspace(lo, hi, points)))))


def random_cubic_model(rng, d, convex=False, x=None):
    from cubicnewton.taylor_model import CubicModel

    A = rng.normal(size=(d, d))
    H = A @ A.T if convex else 0.5 * (A + A.T)
    return CubicModel(
        x=np.zeros(d) if x is None else x,
        f_x=float(rng.normal()),
        g=rng.normal(size=d),
        H=H,
        delta_bar=float(rng.random() * 0.5),
        M=float(0.5 + 2.0 * rng.random()),
    )


def descent_oracle_best(model, rng, starts=32, maxiter=200):
    """Best model value found by multi-start first-order descent (L-BFGS).

    Start radii span the a-priori step-radius scale so the global basin is hit;
    nothing here touches the eigendecomposition route.
    """
    g, H = model.g, model.H
    scale = (np.sqrt(2.0 * np.linalg.norm(g) / model.M)
             + 2.0 * (np.linalg.norm(H, 2) + model.delta_bar) / model.M)
    best = np.inf
    d = len(g)
    for _ in range(starts):
        u = rng.normal(size=d)
        u /= max(np.linalg.norm(u), 1e-30)
        s0 = u * scale * (0.05 + 1.5 * rng.random())
        res = minimize(lambda s: (model.value(model.x + s), model.grad(model.x + s)),
                       s0, jac=True, method="L-BFGS-B",
                       options={"maxiter": maxiter, "gtol": 1e-12, "ftol": 1e-16})
        best = min(best, float(res.fun))
    return best


def longdouble_cubic_value(model, y):
    """Term-by-term model value in extended precision."""
    s = (np.asarray(y) - model.x).astype(np.longdouble)
    g = model.g.astype(np.longdouble)
    H = model.H.astype(np.longdouble)
    r = np.sqrt(np.sum(s * s))
    total = np.longdouble(model.f_x)
    total += np.sum(g * s)
    total += np.longdouble(0.5) * np.sum(s * (H @ s))
    total += np.longdouble(0.5) * np.longdouble(model.delta_bar) * r**2
    total += np.longdouble(model.M) / np.longdouble(6.0) * r**3
    return float(total)
