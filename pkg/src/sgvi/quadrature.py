"""Unscented-transform sigma points and Gaussian expectations.

The rule uses ``m = 2 n_x + 1`` nodes. With the defaults ``alpha = 1`` and
``kappa = 3 - n_x`` the 1-D rule coincides with 3-point Gauss-Hermite and is
exact for polynomials up to degree five.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateScaling, NonFiniteValue
from .gaussian import GaussianBelief, sqrt_factor


@dataclass(frozen=True)
class UnscentedParams:
    """Scaling of the unscented transform.

    ``kappa=None`` selects ``3 - n_x`` for whatever dimension the rule is
    applied to.
    """

    alpha: float = 1.0
    beta_s: float = 0.1
    kappa: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.beta_s >= 0:
            raise ValueError(f"beta_s must be >= 0, got {self.beta_s}")

    def kappa_for(self, n_x: int) -> float:
        return 3.0 - n_x if self.kappa is None else float(self.kappa)

    def lam(self, n_x: int) -> float:
        return self.alpha ** 2 * (n_x + self.kappa_for(n_x)) - n_x


@dataclass(frozen=True, eq=False)
class SigmaPointSet:
    points: np.ndarray        # (m, n_x)
    mean_weights: np.ndarray  # (m,)
    cov_weights: np.ndarray   # (m,)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def unscented_weights(n_x: int, params: UnscentedParams):
    """Return ``(scale, mean_weights, cov_weights)`` where ``scale = n_x + lambda``."""
    lam = params.lam(n_x)
    scale = n_x + lam
    if not scale > 0:
        raise DegenerateScaling(
            f"n_x + lambda = {scale} <= 0 for n_x={n_x}, {params}")
    wm = np.full(2 * n_x + 1, 0.5 / scale)
    wm[0] = lam / scale
    wc = wm.copy()
    wc[0] += 1.0 - params.alpha ** 2 + params.beta_s
    return scale, wm, wc


def sigma_points_from_factor(mean: np.ndarray, chol: np.ndarray,
                             params: UnscentedParams) -> SigmaPointSet:
    """Sigma points from a mean and an already computed lower factor of the covariance."""
    n = mean.shape[0]
    scale, wm, wc = unscented_weights(n, params)
    cols = np.sqrt(scale) * chol.T  # row i is column i of sqrt(scale) * L
    points = np.empty((2 * n + 1, n))
    points[0] = mean
    points[1:n + 1] = mean + cols
    points[n + 1:] = mean - cols
    return SigmaPointSet(points, wm, wc)


def generate_sigma_points(belief: GaussianBelief,
                          params: UnscentedParams = UnscentedParams()) -> SigmaPointSet:
    """Sigma points ``mean, mean +/- column_i(sqrt((n_x + lambda) Sigma))``.

    Raises :class:`DegenerateScaling` when ``n_x + lambda <= 0``.
    """
    return sigma_points_from_factor(belief.mean, belief.chol, params)


def sigma_points(mean, covariance, params: UnscentedParams = UnscentedParams()) -> SigmaPointSet:
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    return sigma_points_from_factor(mean, sqrt_factor(covariance), params)


def weighted_sum(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``sum_i weights[i] * values[i]`` over the leading axis."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue("integrand is not finite at every sigma point")
    return np.tensordot(weights, values, axes=(0, 0))


def expect(g: Callable[[np.ndarray], np.ndarray], sigma: SigmaPointSet,
           use_cov_weights: bool = False) -> np.ndarray:
    """Approximate ``E[g(x)]`` by ``sum_i w_i g(x_i)``.

    ``g`` is called once per sigma point and may return a scalar, vector or
    matrix. Set ``use_cov_weights`` for centred outer-product integrands.
    """
    values = np.stack([np.asarray(g(x), dtype=float) for x in sigma.points])
    w = sigma.cov_weights if use_cov_weights else sigma.mean_weights
    return weighted_sum(values, w)
