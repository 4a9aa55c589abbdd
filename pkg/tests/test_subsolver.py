import numpy as np
import pytest

from cubicnewton import (
    CubicModel,
    ExactOracle,
    NoConvergence,
    Schedule2,
    TensorModel,
    make_synthetic_logistic,
    run,
    solve_cubic,
    solve_tensor,
)

from helpers import descent_oracle_best, random_cubic_model


def test_zero_gradient_psd_returns_zero_step():
    m = CubicModel(np.zeros(3), 0.0, np.zeros(3), np.eye(3), 0.0, 1.0)
    res = solve_cubic(m, 0.0)
    np.testing.assert_array_equal(res.s, np.zeros(3))
    assert res.cert == 0.0 and res.r == 0.0


def test_scalar_cubic_stationarity():
    # 1 + 3 s |s| = 0  =>  s = -1/sqrt(3)
    m = CubicModel(np.zeros(1), 0.0, np.array([1.0]), np.zeros((1, 1)), 0.0, 6.0)
    res = solve_cubic(m, 0.0)
    assert res.s[0] == pytest.approx(-1.0 / np.sqrt(3.0), rel=1e-12)


def test_vanishing_cubic_weight_is_regularized_newton():
    m = CubicModel(np.zeros(1), 0.0, np.array([2.0]), np.array([[1.0]]), 1.0, 1e-12)
    res = solve_cubic(m, 0.0)
    assert res.s[0] == pytest.approx(-1.0, abs=1e-6)


def test_secular_matches_multistart_descent_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = random_cubic_model(rng, int(rng.integers(1, 5)))
        res = solve_cubic(m, 0.0)
        best = descent_oracle_best(m, rng)
        assert abs(m.value(m.x + res.s) - best) <= 1e-8


def test_certificate_honesty_replay():
    rng = np.random.default_rng(1)
    for _ in range(30):
        m = random_cubic_model(rng, int(rng.integers(1, 6)))
        res = solve_cubic(m, 1e-8)
        replay = float(np.linalg.norm(m.grad(m.x + res.s)))
        assert replay <= 1e-8
        assert replay == pytest.approx(res.cert, rel=1e-12, abs=1e-300)
        assert res.r == pytest.approx(np.linalg.norm(res.s), rel=1e-12, abs=0.0)


def test_monotone_progress_from_anchor():
    rng = np.random.default_rng(2)
    for backend in ("secular", "iterative"):
        for _ in range(20):
            m = random_cubic_model(rng, int(rng.integers(1, 5)), convex=(backend == "iterative"))
            res = solve_cubic(m, 1e-8, backend=backend)
            assert m.value(m.x + res.s) <= m.value(m.x) + 1e-12


def test_secular_iterative_agreement():
    rng = np.random.default_rng(3)
    tau = 1e-8
    for _ in range(100):
        m = random_cubic_model(rng, int(rng.integers(1, 7)), convex=True)
        r1 = solve_cubic(m, tau, backend="secular")
        r2 = solve_cubic(m, tau, backend="iterative")
        gap = abs(m.value(m.x + r1.s) - m.value(m.x + r2.s))
        assert gap <= 10.0 * tau * max(r1.r, r2.r) + 1e-14


def test_hard_case_eigenvector_correction():
    # gradient orthogonal to the bottom eigenvector, lam_min < -delta
    H = np.diag([-2.0, 1.0, 3.0])
    g = np.array([0.0, 0.5, -0.3])
    m = CubicModel(np.zeros(3), 0.0, g, H, 0.5, 2.0)
    res = solve_cubic(m, 1e-8)
    r_boundary = 2.0 * (2.0 - 0.5) / 2.0
    assert res.cert <= 1e-8
    assert res.r == pytest.approx(r_boundary, rel=1e-12)
    assert res.method_used == "secular"


def test_pure_eigenstep_when_gradient_vanishes():
    H = np.diag([-1.0, 2.0])
    m = CubicModel(np.zeros(2), 0.0, np.zeros(2), H, 0.0, 1.0)
    res = solve_cubic(m, 1e-10)
    assert res.r == pytest.approx(2.0, rel=1e-12)  # 2*(-lam_min)/M
    assert res.cert <= 1e-10


def test_iterative_backend_needs_positive_tau():
    m = random_cubic_model(np.random.default_rng(4), 3)
    with pytest.raises(ValueError):
        solve_cubic(m, 0.0, backend="iterative")
    with pytest.raises(ValueError):
        solve_cubic(m, -1.0)


def test_tensor_zero_gradient_is_fixpoint():
    d = 3
    m = TensorModel(np.zeros(d), 0.0, np.zeros(d), np.eye(d), np.zeros((d, d, d)),
                    0.0, 0.0, 1.0)
    res = solve_tensor(m, 1e-8)
    np.testing.assert_array_equal(res.s, np.zeros(d))


def test_tensor_scalar_quartic_stationarity():
    # gradient 1 + 4 s^3 = 0  =>  s = -(1/4)^(1/3)
    m = TensorModel(np.zeros(1), 0.0, np.array([1.0]), np.zeros((1, 1)),
                    np.zeros((1, 1, 1)), 0.0, 0.0, 8.0)
    res = solve_tensor(m, 1e-12)
    assert res.s[0] == pytest.approx(-(0.25 ** (1.0 / 3.0)), rel=1e-9)


def test_tensor_certificate_replay():
    rng = np.random.default_rng(5)
    for _ in range(10):
        d = 3
        A = rng.normal(size=(d, d))
        T = rng.normal(size=(d, d, d)) * 0.3
        T_sym = sum(np.transpose(T, p) for p in
                    ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1),
                     (2, 1, 0))) / 6
        m = TensorModel(rng.normal(size=d), 0.0, rng.normal(size=d), A @ A.T,
                        T_sym, 0.1, 0.2, 1.0)
        res = solve_tensor(m, 1e-7)
        assert float(np.linalg.norm(m.grad(m.x + res.s))) <= 1e-7
        assert m.value(m.x + res.s) <= m.f_x + 1e-12


def test_no_convergence_is_loud():
    m = random_cubic_model(np.random.default_rng(6), 4, convex=True)
    mt = TensorModel(m.x, 0.0, m.g, m.H, np.zeros((4, 4, 4)), 0.0, 0.0, 1.0)
    with pytest.raises(NoConvergence):
        solve_tensor(mt, 1e-14, max_iters=3)


def test_step_progress_inequality_along_run():
    # progress bound of the certified step, checked with exact oracles and a
    # strictly positive quadratic damping (delta_bar = 2*sigma2 > 0)
    prob = make_synthetic_logistic(100, 6, seed=2)
    sm = prob.smoothness()
    M = 4.0 * sm.L2
    sched = Schedule2(M=M, sigma2=0.05, T=40)
    with pytest.warns(UserWarning):
        out = run(prob, ExactOracle(prob), sched, 3.0 * np.ones(6),
                  collect_diagnostics=True)
    for rec in out.diagnostics:
        gnext = rec.grad_f_x_next
        gn = np.linalg.norm(gnext)
        lhs = rec.cert**2 / rec.delta_bar + float(gnext @ (rec.v - rec.x_next))
        rhs = min(gn**2 / (4.0 * rec.delta_bar), gn**1.5 / np.sqrt(3.0 * M))
        assert lhs >= rhs - 1e-9
