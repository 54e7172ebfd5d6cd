import pickle

import numpy as np
import pytest

from sgvi import AnchorCoincidence, DimensionMismatch, benchmark_1d, coordinated_turn, range_measurements
from sgvi.models import (central_difference_jacobian, constant_velocity, random_linear_model,
                         range_tracking)


def test_benchmark_values():
    m = benchmark_1d(1.0, 1.0)
    f, h, H = m.transition.f, m.measurement.h, m.measurement.h_jacobian
    assert f(np.array([0.0]), 1)[0] == pytest.approx(8.0)
    assert f(np.array([1.0]), 1)[0] == pytest.approx(13.9)
    assert h(np.array([2.0]))[0] == pytest.approx(0.4)
    assert H(np.array([2.0]))[0, 0] == pytest.approx(0.6)
    assert m.prior.mean[0] == 5.0 and m.prior.covariance[0, 0] == 4.0


def test_benchmark_rejects_nonpositive_noise():
    with pytest.raises(ValueError):
        benchmark_1d(0.0, 1.0)


def test_benchmark_jacobian_matches_differences(rng):
    m = benchmark_1d(1.0, 1.0)
    for x in rng.uniform(-20, 20, 50):
        J = m.transition.jacobian(np.array([x]), 3)
        Jn = central_difference_jacobian(lambda y: m.transition.f(y, 3), np.array([x]))
        assert abs(J[0, 0] - Jn[0, 0]) < 1e-5


def test_coordinated_turn_half_circle():
    tm = coordinated_turn(1.0, 1.0, 1e-4)
    x1 = tm.f(np.array([0.0, 0.0, 1.0, 0.0, np.pi]), 1)
    assert x1[0] == pytest.approx(0.0, abs=1e-12)
    assert x1[1] == pytest.approx(2 / np.pi)
    assert x1[3] == pytest.approx(np.pi)
    Q = tm.Q(np.zeros(5), 1)
    assert Q[4, 4] == pytest.approx(1e-4, rel=1e-6)
    assert np.min(np.linalg.eigvalsh(Q)) > 0


def test_coordinated_turn_straight_line_limit():
    tm = coordinated_turn(0.1, 1.0, 1e-4)
    base = np.array([1.0, 2.0, 1.5, 0.3, 0.0])
    tiny = base.copy()
    tiny[4] = 1e-8
    np.testing.assert_allclose(tm.f(tiny, 1)[:4], tm.f(base, 1)[:4], atol=1e-9)
    np.testing.assert_allclose(tm.jacobian(tiny, 1), tm.jacobian(base, 1), atol=1e-9)
    np.testing.assert_allclose(tm.f(base, 1)[:2], [1.0 + 0.15 * np.cos(0.3), 2.0 + 0.15 * np.sin(0.3)])


def test_coordinated_turn_batch_matches_rows(rng):
    tm = coordinated_turn(0.1, 1.0, 1e-4)
    X = rng.standard_normal((7, 5))
    np.testing.assert_allclose(tm.f(X, 1), np.stack([tm.f(x, 1) for x in X]))


def test_coordinated_turn_jacobian_vs_differences(rng):
    tm = coordinated_turn(0.1, 4.0, 1e-4)
    for _ in range(100):
        x = rng.standard_normal(5) * np.array([5, 5, 2, 3, 0.5])
        if rng.random() < 0.2:
            x[4] = rng.uniform(-1e-3, 1e-3)
        J = tm.jacobian(x, 1)
        Jn = central_difference_jacobian(lambda y: tm.f(y, 1), x)
        np.testing.assert_allclose(J, Jn, atol=1e-5)


def test_range_example():
    m = range_measurements([[0.0, 0.0], [3.0, 0.0]], 0.5)
    x = np.array([3.0, 4.0, 0, 0, 0])
    np.testing.assert_allclose(m.h(x), [5.0, 4.0])
    np.testing.assert_allclose(m.h_jacobian(x)[0, :2], [0.6, 0.8])
    np.testing.assert_allclose(m.R, 0.25 * np.eye(2))


def test_range_jacobian_vs_differences(rng):
    m = range_measurements([[0.0, 0.0], [8.0, 0.0], [4.0, 6.0]], 0.5)
    for _ in range(50):
        x = rng.uniform(-5, 10, 5)
        np.testing.assert_allclose(m.h_jacobian(x), central_difference_jacobian(m.h, x), atol=1e-6)


def test_anchor_coincidence():
    m = range_measurements([[1.0, 1.0]], 0.5)
    with pytest.raises(AnchorCoincidence):
        m.h_jacobian(np.array([1.0, 1.0, 0, 0, 0]))


def test_bad_anchor_shape():
    with pytest.raises(DimensionMismatch):
        range_measurements([[0.0, 0.0, 0.0]], 0.5)


def test_models_pickle():
    m = range_tracking()
    m2 = pickle.loads(pickle.dumps(m))
    x = np.array([1.0, 2.0, 1.0, 0.2, 0.1])
    np.testing.assert_array_equal(m.transition.f(x, 1), m2.transition.f(x, 1))


def test_linear_models(rng):
    cv = constant_velocity()
    assert cv.n_x == 4 and cv.n_z == 2
    lm = random_linear_model(rng, 3, 2)
    assert np.max(np.abs(np.linalg.eigvals(lm.A))) <= 0.95 + 1e-12
    sm = lm.to_system()
    x = rng.standard_normal(3)
    np.testing.assert_allclose(sm.transition.f(x, 1), lm.A @ x)
    np.testing.assert_allclose(sm.measurement.h(x), lm.H @ x)
