"""Gaussian beliefs with a consistent covariance / precision pair.

A :class:`GaussianBelief` is the parameter point ``{mean, precision}`` that
every estimator in this package reads and produces. Construction always goes
through :func:`belief_from_moments` or :func:`belief_from_canonical`, which
symmetrize the input, factorize it and refuse anything that is not symmetric
positive definite. Indefinite input is never repaired.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, NonFiniteValue, NotPositiveDefinite

# elementwise bound on |precision @ covariance - I|
INVERSE_TOL = 1e-8


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _as_square(m, name: str) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteValue(f"{name} contains non-finite entries")
    return m


def _as_vector(v, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue(f"{name} contains non-finite entries")
    return v


def sqrt_factor(covariance) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == covariance``.

    Raises
    ------
    NotPositiveDefinite
        If the (symmetrized) matrix has no Cholesky factor.
    """
    cov = symmetrize(_as_square(covariance, "covariance"))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc


def spd_inverse(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Inverse of an SPD matrix through its Cholesky factor."""
    m = symmetrize(m)
    try:
        c = sla.cho_factor(m, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"{name} is not positive definite") from exc
    return symmetrize(sla.cho_solve(c, np.eye(m.shape[0]), check_finite=False))


@dataclass(frozen=True)
class Dim:
    n_x: int
    n_z: int

    def __post_init__(self):
        if int(self.n_x) < 1 or int(self.n_z) < 1:
            raise DimensionMismatch(f"dimensions must be >= 1, got {self}")


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    """Immutable Gaussian ``N(mean, covariance)``.

    ``precision`` is the cached inverse of ``covariance`` and ``chol`` its
    lower Cholesky factor; the arrays are read-only. Build instances with
    :func:`belief_from_moments` or :func:`belief_from_canonical`.
    """

    mean: np.ndarray
    covariance: np.ndarray
    precision: np.ndarray
    chol: np.ndarray = field(repr=False)

    @property
    def n_x(self) -> int:
        return self.mean.shape[0]

    @property
    def shifted_mean(self) -> np.ndarray:
        """Information vector ``precision @ mean``."""
        return self.precision @ self.mean

    def marginal(self, components) -> GaussianBelief:
        idx = np.asarray(components, dtype=int)
        return belief_from_moments(self.mean[idx], self.covariance[np.ix_(idx, idx)])


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def _check_inverse(precision, covariance):
    err = np.max(np.abs(precision @ covariance - np.eye(covariance.shape[0])))
    if not err <= INVERSE_TOL:
        raise NotPositiveDefinite(
            f"matrix is numerically singular (inverse residual {err:.2e})")


def belief_from_moments(mean, covariance) -> GaussianBelief:
    """Belief from a mean vector and a covariance matrix.

    >>> belief_from_moments([0.0, 0.0], [[2.0, 0.0], [0.0, 0.5]]).precision
    array([[0.5, 0. ],
           [0. , 2. ]])
    """
    mean = _as_vector(mean, "mean")
    cov = symmetrize(_as_square(covariance, "covariance"))
    if cov.shape[0] != mean.shape[0]:
        raise DimensionMismatch(
            f"covariance is {cov.shape} but mean has length {mean.shape[0]}")
    chol = sqrt_factor(cov)
    prec = symmetrize(sla.cho_solve((chol, True), np.eye(mean.shape[0]), check_finite=False))
    _check_inverse(prec, cov)
    mean = mean.copy()
    _freeze(mean, cov, prec, chol)
    return GaussianBelief(mean, cov, prec, chol)


def belief_from_canonical(precision, shifted_mean) -> GaussianBelief:
    """Belief from canonical (information) parameters.

    ``covariance = inv(precision)`` and ``mean = covariance @ shifted_mean``.
    """
    eta = _as_vector(shifted_mean, "shifted_mean")
    prec = symmetrize(_as_square(precision, "precision"))
    if prec.shape[0] != eta.shape[0]:
        raise DimensionMismatch(
            f"precision is {prec.shape} but shifted_mean has length {eta.shape[0]}")
    try:
        pc = sla.cho_factor(prec, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("precision is not positive definite") from exc
    cov = symmetrize(sla.cho_solve(pc, np.eye(eta.shape[0]), check_finite=False))
    mean = sla.cho_solve(pc, eta, check_finite=False)
    chol = sqrt_factor(cov)
    _check_inverse(prec, cov)
    _freeze(mean, cov, prec, chol)
    return GaussianBelief(mean, cov, prec, chol)


def _from_trusted(mean: np.ndarray, covariance: np.ndarray, precision: np.ndarray) -> GaussianBelief:
    # internal fast path: caller guarantees a symmetric consistent pair
    chol = sqrt_factor(covariance)
    mean = np.array(mean, dtype=float)
    cov = np.array(covariance, dtype=float)
    prec = np.array(precision, dtype=float)
    _freeze(mean, cov, prec, chol)
    return GaussianBelief(mean, cov, prec, chol)
