import numpy as np
import pytest

from cubicnewton import (
    CubicModel,
    DimensionMismatch,
    ExactOracle,
    TensorModel,
    make_synthetic_logistic,
    model_grad,
    model_value,
)

from helpers import fd_gradient, longdouble_cubic_value, random_cubic_model


def _random_tensor_model(rng, d):
    A = rng.normal(size=(d, d))
    T = rng.normal(size=(d, d, d))
    T_sym = sum(np.transpose(T, p) for p in
                ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))) / 6
    return TensorModel(
        x=rng.normal(size=d), f_x=float(rng.normal()), g=rng.normal(size=d),
        H=0.5 * (A + A.T), T3=T_sym, delta_bar=float(rng.random()),
        eta3_delta3=float(4.0 * rng.random()), M=float(0.5 + rng.random()),
    )


def test_value_at_anchor_is_f_x():
    rng = np.random.default_rng(0)
    m = random_cubic_model(rng, 4)
    assert model_value(m, m.x) == m.f_x
    mt = _random_tensor_model(rng, 3)
    assert model_value(mt, mt.x) == mt.f_x


def test_scalar_hand_expansion():
    m = CubicModel(np.zeros(1), 0.0, np.array([1.0]), np.zeros((1, 1)), 0.0, 6.0)
    assert model_value(m, np.array([1.0])) == 2.0  # 1 + 0 + 0 + 1
    # gradient of the same model: 1 + 3 s |s|
    for s in (-0.7, 0.3, 2.0):
        got = model_grad(m, np.array([s]))[0]
        assert got == pytest.approx(1.0 + 3.0 * s * abs(s), rel=1e-15)


def test_grad_at_anchor_is_g():
    rng = np.random.default_rng(1)
    m = random_cubic_model(rng, 5)
    np.testing.assert_array_equal(model_grad(m, m.x), m.g)


def test_value_against_longdouble_resummation():
    rng = np.random.default_rng(2)
    for _ in range(50):
        m = random_cubic_model(rng, int(rng.integers(1, 8)))
        y = m.x + rng.normal(size=len(m.g))
        ref = longdouble_cubic_value(m, y)
        assert model_value(m, y) == pytest.approx(ref, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("p", [2, 3])
def test_grad_matches_finite_differences(p):
    rng = np.random.default_rng(3)
    for _ in range(20):
        d = int(rng.integers(1, 5))
        m = random_cubic_model(rng, d) if p == 2 else _random_tensor_model(rng, d)
        y = m.x + rng.normal(size=d)
        g = model_grad(m, y)
        g_fd = fd_gradient(lambda z: model_value(m, z), y, 1e-6 * (1 + np.linalg.norm(y)))
        assert np.linalg.norm(g - g_fd) <= 1e-6 * (1.0 + np.linalg.norm(g_fd))


def test_convex_when_shifted_hessian_psd():
    # midpoint inequality along random segments
    rng = np.random.default_rng(4)
    for _ in range(10):
        d = int(rng.integers(1, 5))
        m = random_cubic_model(rng, d, convex=True)
        for _ in range(10):
            a = m.x + rng.normal(size=d) * 2
            b = m.x + rng.normal(size=d) * 2
            mid = 0.5 * (a + b)
            assert model_value(m, mid) <= 0.5 * (model_value(m, a) + model_value(m, b)) + 1e-12


def test_majorization_with_exact_derivatives():
    prob = make_synthetic_logistic(40, 4, seed=5)
    L2 = prob.smoothness().L2
    rng = np.random.default_rng(6)
    x = rng.normal(size=4)
    out = ExactOracle(prob).query(x, order=2)
    f_x = prob.eval(x, order=0).f
    m = CubicModel(x, f_x, out.g, out.H, 0.0, 2.0 * L2)
    for _ in range(100):
        y = x + rng.normal(size=4) * 2.0
        assert model_value(m, y) >= prob.eval(y, order=0).f - 1e-10


def test_dimension_and_parameter_validation():
    m = random_cubic_model(np.random.default_rng(7), 3)
    with pytest.raises(DimensionMismatch):
        model_value(m, np.zeros(4))
    with pytest.raises(ValueError):
        CubicModel(np.zeros(2), 0.0, np.zeros(2), np.eye(2), -0.1, 1.0)
    with pytest.raises(ValueError):
        TensorModel(np.zeros(2), 0.0, np.zeros(2), np.eye(2), np.zeros((2, 2, 2)),
                    0.0, 0.0, 1.0, p=4)
