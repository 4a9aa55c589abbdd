import math

import numpy as np
import pytest
from scipy.special import expit

from cubicnewton import (
    DimensionMismatch,
    LogisticProblem,
    NonFinite,
    QuadraticProblem,
    UnsupportedOrder,
    make_random_quadratic,
    make_synthetic_logistic,
)
from cubicnewton.problems import SIGMOID_D2_MAX, SIGMOID_D3_MAX

from helpers import fd_gradient, fd_jacobian, grid_refine_max


def test_identity_quadratic():
    prob = QuadraticProblem(np.eye(2), np.zeros(2))
    r = prob.eval(np.array([1.0, 0.0]), order=2)
    assert r.f == 0.5
    np.testing.assert_array_equal(r.grad, [1.0, 0.0])
    np.testing.assert_array_equal(r.hess, np.eye(2))


def test_logistic_zero_feature_row():
    prob = LogisticProblem(np.zeros((1, 3)), [1.0])
    r = prob.eval(np.array([5.0, -2.0, 0.3]), order=1)
    assert r.f == pytest.approx(math.log(2.0), abs=1e-15)
    np.testing.assert_array_equal(r.grad, np.zeros(3))


def test_logistic_two_sample_gradient_vs_fd():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    y = np.array([1.0, -1.0])
    prob = LogisticProblem(X, y)
    x = np.zeros(2)
    g = prob.eval(x, order=1).grad
    g_fd = fd_gradient(lambda z: prob.eval(z, order=0).f, x, 1e-5)
    assert np.linalg.norm(g - g_fd) <= 1e-6 * (1.0 + np.linalg.norm(g_fd))
    # hand values: d/dx1 = -sigma(0)/2 * (+1) component etc.
    np.testing.assert_allclose(g, [-0.25, 0.25], atol=1e-12)


def test_quadratic_constants_diagonal():
    prob = QuadraticProblem(np.diag([1.0, 4.0]), np.zeros(2))
    sm = prob.smoothness()
    assert sm.L1 == 4.0 and sm.mu == 1.0 and sm.L2 == 0.0 and sm.L3 == 0.0


def test_sigmoid_second_derivative_bound():
    # max_z |sigma''(z)| computed by grid+refine equals 1/(6*sqrt(3))
    sig2 = lambda z: expit(z) * expit(-z) * (1.0 - 2.0 * expit(z))
    got = grid_refine_max(sig2, -10.0, 10.0)
    assert got <= SIGMOID_D2_MAX + 1e-12
    assert got == pytest.approx(1.0 / (6.0 * math.sqrt(3.0)), abs=1e-9)


def test_sigmoid_third_derivative_bound():
    # design pin: numeric max of |sigma'''| over a refined grid is exactly 1/8
    def sig3(z):
        w = expit(z) * expit(-z)
        return w * (1.0 - 6.0 * w)

    got = grid_refine_max(sig3, -10.0, 10.0)
    assert got == pytest.approx(SIGMOID_D3_MAX, abs=1e-9)


def test_logistic_unit_row_constants():
    prob = LogisticProblem(np.array([[1.0]]), [1.0])
    sm = prob.smoothness()
    assert sm.L2 == pytest.approx(1.0 / (6.0 * math.sqrt(3.0)), rel=1e-15)
    assert sm.L1 == 0.25
    assert sm.L3 == pytest.approx(0.125, rel=1e-15)


def test_logistic_zero_features_constants():
    prob = LogisticProblem(np.zeros((4, 2)), [1, -1, 1, -1], l2_reg=0.3)
    sm = prob.smoothness()
    assert sm.L1 == 0.3 and sm.L2 == 0.0 and sm.mu == 0.3


@pytest.mark.parametrize("make", [
    lambda: make_random_quadratic(5, seed=0),
    lambda: make_synthetic_logistic(40, 5, seed=1),
    lambda: make_synthetic_logistic(30, 4, seed=2, l2_reg=0.1),
])
def test_finite_difference_invariants(make):
    prob = make()
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = rng.normal(size=prob.d)
        h = 1e-5 * (1.0 + np.linalg.norm(x))
        r = prob.eval(x, order=2)
        g_fd = fd_gradient(lambda z: prob.eval(z, order=0).f, x, h)
        assert np.linalg.norm(r.grad - g_fd) <= 1e-5 * (1.0 + np.linalg.norm(g_fd))
        H_fd = fd_jacobian(lambda z: prob.eval(z, order=1).grad, x, h)
        assert np.linalg.norm(r.hess - H_fd, 2) <= 1e-4 * (1.0 + np.linalg.norm(H_fd, 2))


def test_hessian_lipschitz_sampled():
    prob = make_synthetic_logistic(50, 5, seed=4)
    L2 = prob.smoothness().L2
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.normal(size=5) * 2.0
        step = rng.normal(size=5)
        step *= rng.random() / max(np.linalg.norm(step), 1e-30)
        y = x + step
        Hx = prob.eval(x, order=2).hess
        Hy = prob.eval(y, order=2).hess
        assert np.linalg.norm(Hx - Hy, 2) <= L2 * np.linalg.norm(x - y) + 1e-10


def test_second_order_taylor_error_bound():
    # exact-oracle Taylor-remainder bounds: cubic in the value, quadratic in grad
    prob = make_synthetic_logistic(40, 4, seed=6)
    L2 = prob.smoothness().L2
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = rng.normal(size=4)
        y = x + rng.normal(size=4)
        rx = prob.eval(x, order=2)
        s = y - x
        phi = rx.f + rx.grad @ s + 0.5 * s @ (rx.hess @ s)
        phi_grad = rx.grad + rx.hess @ s
        ry = prob.eval(y, order=1)
        dist = np.linalg.norm(s)
        assert abs(ry.f - phi) <= L2 / 6.0 * dist**3 + 1e-10
        assert np.linalg.norm(ry.grad - phi_grad) <= L2 / 3.0 * dist**2 + 1e-10


def test_third_order_taylor_error_bound():
    prob = make_synthetic_logistic(30, 4, seed=8)
    L3 = prob.smoothness().L3
    rng = np.random.default_rng(9)
    for _ in range(30):
        x = rng.normal(size=4)
        y = x + rng.normal(size=4) * 0.8
        rx = prob.eval(x, order=3)
        s = y - x
        Ts = np.tensordot(rx.third, s, axes=([2], [0]))
        phi3 = rx.f + rx.grad @ s + 0.5 * s @ (rx.hess @ s) + (s @ (Ts @ s)) / 6.0
        dist = np.linalg.norm(s)
        assert abs(prob.eval(y, order=0).f - phi3) <= L3 / 24.0 * dist**4 + 1e-10


def test_subset_averaging_is_the_minibatch_primitive():
    prob = make_synthetic_logistic(20, 3, seed=10)
    x = np.array([0.4, -1.0, 2.0])
    idx = [2, 5, 11]
    r = prob.eval(x, order=2, subset=idx)
    manual = LogisticProblem(prob.X[idx], prob.y[idx])
    rm = manual.eval(x, order=2)
    assert r.f == pytest.approx(rm.f, rel=1e-15)
    np.testing.assert_allclose(r.grad, rm.grad, rtol=1e-14)
    np.testing.assert_allclose(r.hess, rm.hess, rtol=1e-14)


def test_far_start_is_overflow_free():
    # raw exp overflows at the conventional far starting point 3*e and beyond
    prob = make_synthetic_logistic(50, 8, seed=11)
    for scale in (3.0, 1000.0):
        r = prob.eval(scale * np.ones(8), order=2)
        assert np.isfinite(r.f)
        assert np.all(np.isfinite(r.grad)) and np.all(np.isfinite(r.hess))


def test_validation_errors():
    with pytest.raises(ValueError):
        QuadraticProblem(np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2))
    with pytest.raises(ValueError):
        QuadraticProblem(np.eye(2), np.ones(2), x_star=np.zeros(2))
    with pytest.raises(ValueError):
        LogisticProblem(np.ones((2, 2)), [1.0, 2.0])
    with pytest.raises(NonFinite):
        LogisticProblem(np.array([[np.inf]]), [1.0])
    prob = make_synthetic_logistic(10, 3, seed=0)
    with pytest.raises(NonFinite):
        prob.eval(np.array([np.nan, 0.0, 0.0]))
    with pytest.raises(DimensionMismatch):
        prob.eval(np.zeros(4))
    with pytest.raises(UnsupportedOrder):
        prob.eval(np.zeros(3), order=4)
    big = make_synthetic_logistic(10, 65, seed=0)
    with pytest.raises(UnsupportedOrder):
        big.eval(np.zeros(65), order=3)
