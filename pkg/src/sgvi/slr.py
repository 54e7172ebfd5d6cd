"""Statistical linear regression (SLR) of the transition model.

Given the previous belief ``N(mu, Sigma)``, SLR replaces ``f`` with the affine
surrogate ``F x + b + e`` that minimizes the mean-square error under that
belief, ``e ~ N(0, Lambda)``. The predictive moments ``mu_R`` and ``S`` (which
includes ``Q``) give the Gaussian ``N(mu_R, S)`` standing in for
``E_prev[p(x_t | x_{t-1})]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NonFiniteValue, NotPositiveDefinite
from .gaussian import GaussianBelief, belief_from_moments, sqrt_factor, symmetrize
from .models import central_difference_jacobian
from .quadrature import UnscentedParams, generate_sigma_points

# tolerated negative eigenvalue of Lambda from quadrature round-off
LAMBDA_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SlrResult:
    F: np.ndarray
    b: np.ndarray
    Lambda: np.ndarray
    mu_R: np.ndarray
    S: np.ndarray
    C: np.ndarray


def _finite(name, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteValue(f"{name} produced non-finite values")


def slr_linearize(f: Callable[[np.ndarray], np.ndarray], Q, prev: GaussianBelief,
                  params: UnscentedParams = UnscentedParams()) -> SlrResult:
    """Sigma-point SLR of ``f`` about ``prev``.

    Parameters
    ----------
    f : callable
        State map, vectorized over rows: ``(m, n_x) -> (m, n_x)``.
    Q : array_like
        Additive process-noise covariance (included in ``S``).
    prev : GaussianBelief
        Belief the regression is taken over.
    params : UnscentedParams
        Quadrature scaling. ``mu_R`` uses the mean weights; ``C`` and ``S``
        use the covariance weights.

    Returns
    -------
    SlrResult
        ``F = C^T Sigma^-1``, ``b = mu_R - F mu``, ``Lambda = S - Q - F Sigma F^T``.

    Raises
    ------
    NotPositiveDefinite
        If ``S`` is not positive definite, or if ``Lambda`` is clearly
        indefinite while the quadrature weights are all non-negative.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    sp = generate_sigma_points(prev, params)
    Y = np.asarray(f(sp.points), dtype=float).reshape(sp.n_points, -1)
    _finite("transition function", Y)
    mu_R = sp.mean_weights @ Y
    dX = sp.points - prev.mean
    dY = Y - mu_R
    wdY = dY * sp.cov_weights[:, None]
    C = dX.T @ wdY
    cov_f = symmetrize(dY.T @ wdY)
    S = cov_f + Q
    sqrt_factor(S)

    F = C.T @ prev.precision
    b = mu_R - F @ prev.mean
    Lambda = symmetrize(cov_f - F @ prev.covariance @ F.T)
    # with a negative centre weight the rule is not PSD-preserving, so Lambda
    # is only checked when every covariance weight is non-negative
    if np.all(sp.cov_weights >= 0):
        lo = np.min(np.linalg.eigvalsh(Lambda))
        if lo < -LAMBDA_TOL:
            raise NotPositiveDefinite(f"SLR error covariance has eigenvalue {lo:.3e}")
    return SlrResult(F=F, b=b, Lambda=Lambda, mu_R=mu_R, S=S, C=C)


def jacobian_linearize(f: Callable[[np.ndarray], np.ndarray],
                       f_jacobian: Optional[Callable[[np.ndarray], np.ndarray]],
                       Q, prev: GaussianBelief) -> SlrResult:
    """First-order Taylor surrogate of ``f`` at the mean of ``prev``.

    ``f_jacobian=None`` falls back to central differences.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    mu = prev.mean
    mu_R = np.atleast_1d(np.asarray(f(mu), dtype=float))
    if f_jacobian is None:
        F = central_difference_jacobian(f, mu)
    else:
        F = np.atleast_2d(np.asarray(f_jacobian(mu), dtype=float))
    _finite("transition function", mu_R, F)
    C = prev.covariance @ F.T
    S = symmetrize(F @ C + Q)
    sqrt_factor(S)
    n = mu.shape[0]
    return SlrResult(F=F, b=mu_R - F @ mu, Lambda=np.zeros((n, n)), mu_R=mu_R, S=S, C=C)


def marginal_predictive(slr: SlrResult) -> GaussianBelief:
    """Gaussian ``N(mu_R, S)`` approximating the one-step predictive density."""
    return belief_from_moments(slr.mu_R, slr.S)
