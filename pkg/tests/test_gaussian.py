import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgvi import (DimensionMismatch, NotPositiveDefinite, belief_from_canonical,
                  belief_from_moments, sqrt_factor)
from conftest import random_cov


def test_diagonal_precision():
    b = belief_from_moments([0.0, 0.0], [[2.0, 0.0], [0.0, 0.5]])
    np.testing.assert_allclose(b.precision, [[0.5, 0.0], [0.0, 2.0]], atol=1e-15)


def test_canonical_scalar():
    b = belief_from_canonical([[4.0]], [8.0])
    assert b.mean[0] == pytest.approx(2.0)
    assert b.covariance[0, 0] == pytest.approx(0.25)


def test_sqrt_factor_example():
    np.testing.assert_allclose(sqrt_factor([[4.0, 2.0], [2.0, 2.0]]), [[2.0, 0.0], [1.0, 1.0]])


def test_sqrt_factor_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        sqrt_factor([[1.0, 2.0], [2.0, 1.0]])


def test_asymmetry_is_symmetrized():
    b = belief_from_moments([0.0, 0.0], [[2.0, 0.3], [0.30000000001, 1.0]])
    np.testing.assert_array_equal(b.covariance, b.covariance.T)


@pytest.mark.parametrize("cov", [[[0.0]], [[-1.0]], [[1.0, 1.0], [1.0, 1.0]]])
def test_non_pd_rejected(cov):
    with pytest.raises(NotPositiveDefinite):
        belief_from_moments(np.zeros(len(cov)), cov)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        belief_from_moments([0.0, 0.0, 0.0], np.eye(2))


def test_arrays_read_only():
    b = belief_from_moments([1.0], [[1.0]])
    with pytest.raises(ValueError):
        b.mean[0] = 3.0


def test_marginal():
    b = belief_from_moments([1.0, 2.0, 3.0], np.diag([1.0, 2.0, 3.0]))
    m = b.marginal([0, 2])
    np.testing.assert_array_equal(m.mean, [1.0, 3.0])
    np.testing.assert_array_equal(m.covariance, np.diag([1.0, 3.0]))


@given(n=st.integers(1, 6), seed=st.integers(0, 2 ** 32 - 1))
def test_round_trip_moments_canonical(n, seed):
    rng = np.random.default_rng(seed)
    cov = random_cov(rng, n)
    mean = rng.standard_normal(n)
    b = belief_from_moments(mean, cov)
    np.testing.assert_allclose(b.precision @ b.covariance, np.eye(n), atol=1e-8)
    back = belief_from_canonical(b.precision, b.shifted_mean)
    np.testing.assert_allclose(back.mean, mean, rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(back.covariance, b.covariance, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(b.chol @ b.chol.T, b.covariance, atol=1e-10)


@given(eps=st.floats(1e-14, 1e-2))
def test_near_singular_either_valid_or_rejected(eps):
    cov = np.array([[1.0, 1.0 - eps], [1.0 - eps, 1.0]])
    try:
        b = belief_from_moments([0.0, 0.0], cov)
    except NotPositiveDefinite:
        return
    assert np.max(np.abs(b.precision @ b.covariance - np.eye(2))) <= 1e-8
