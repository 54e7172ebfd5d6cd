"""Sequential estimators: S-GVI, an iterated-EKF MAP baseline and the
linear information filter.

S-GVI solves, at every time step, for the Gaussian ``q = N(mu, Sigma)`` that
minimizes ``KL[q || p(x_t | z_1:t)]`` with the previous posterior standing in
for ``p(x_{t-1} | z_1:t-1)``. The marginalization term is replaced by the
Gaussian ``N(mu_R, S)`` from statistical linear regression (computed once per
step, about the previous posterior) and the cost is minimized by natural
gradient descent in ``{mu, Sigma^-1}``::

    P  <- (1 - beta) P + beta (E_q[H^T R^-1 H] + S^-1)
    mu <- mu + beta P^-1 (E_q[H^T R^-1 (z - h(x))] + S^-1 (mu_R - mu))

Expectations over ``q`` use sigma points regenerated from the current iterate
on every pass.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import EstimationError, NonFiniteValue, NotPositiveDefinite
from .gaussian import GaussianBelief, _from_trusted, spd_inverse, symmetrize
from .models import LinearModel, SystemModel
from .quadrature import UnscentedParams, sigma_points_from_factor
from .slr import SlrResult, jacobian_linearize, slr_linearize

# denominator guard of the relative-change stopping rule
REL_CHANGE_FLOOR = 1e-8


class Linearization(str, enum.Enum):
    SLR = "slr"
    JACOBIAN = "jacobian"


class Estimator(str, enum.Enum):
    SGVI = "sgvi"                    # linearization taken from SgviConfig
    SGVI_SLR = "sgvi-slr"
    SGVI_JACOBIAN = "sgvi-jacobian"
    MAP = "map"                      # iterated EKF
    IEF = "ief"                      # information filter, linear models only


@dataclass(frozen=True)
class SgviConfig:
    """Iteration settings shared by the iterative estimators.

    Defaults: ``step_size=1``, ``epsilon=0.02``, unscented ``alpha=1``,
    ``beta_s=0.1``, ``kappa=3-n_x``.
    """

    step_size: float = 1.0
    epsilon: float = 0.02
    max_iters: int = 50
    ut_params: UnscentedParams = field(default_factory=UnscentedParams)
    linearization: Linearization = Linearization.SLR

    def __post_init__(self):
        if not 0 < self.step_size <= 1:
            raise ValueError(f"step_size must lie in (0, 1], got {self.step_size}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if int(self.max_iters) < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        object.__setattr__(self, "linearization", Linearization(self.linearization))


@dataclass(frozen=True, eq=False)
class UpdateResult:
    belief: GaussianBelief
    iterations: int
    converged: bool
    elapsed: float


def relative_change(new: np.ndarray, old: np.ndarray) -> float:
    """Largest componentwise ``|new - old| / max(|old|, 1e-8)``."""
    return float(np.max(np.abs(new - old) / np.maximum(np.abs(old), REL_CHANGE_FLOOR)))


def frobenius_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.linalg.norm(new - old) / np.linalg.norm(old))


def linearize_transition(prev: GaussianBelief, model: SystemModel, t: int,
                         cfg: SgviConfig, linearization: Optional[Linearization] = None) -> SlrResult:
    """Predictive moments ``mu_R, S`` of the transition about ``prev``.

    ``Q`` is evaluated at the previous mean.
    """
    trans = model.transition
    Q = trans.Q(prev.mean, t)
    lin = Linearization(linearization or cfg.linearization)
    if lin is Linearization.SLR:
        return slr_linearize(lambda X: trans.f(X, t), Q, prev, cfg.ut_params)
    return jacobian_linearize(lambda x: trans.f(x, t), lambda x: trans.jacobian(x, t), Q, prev)


def expected_measurement_terms(mean: np.ndarray, cov_factor: np.ndarray, z: np.ndarray,
                               model: SystemModel, R_inv: np.ndarray,
                               params: UnscentedParams):
    """Sigma-point estimates of ``E_q[H^T R^-1 H]`` and ``E_q[H^T R^-1 (z - h(x))]``.

    Both use the mean weights.
    """
    sp = sigma_points_from_factor(mean, cov_factor, params)
    meas = model.measurement
    Hs = np.asarray(meas.h_jacobian(sp.points), dtype=float)
    hs = np.asarray(meas.h(sp.points), dtype=float).reshape(sp.n_points, -1)
    if not (np.all(np.isfinite(Hs)) and np.all(np.isfinite(hs))):
        raise NonFiniteValue("measurement model is not finite at a sigma point")
    HtRi = np.swapaxes(Hs, 1, 2) @ R_inv                      # (m, n_x, n_z)
    w = sp.mean_weights
    info = np.einsum("i,ijk,ikl->jl", w, HtRi, Hs)
    grad = np.einsum("i,ijk,ik->j", w, HtRi, z - hs)
    return symmetrize(info), grad


def _cholesky(m: np.ndarray, what: str) -> np.ndarray:
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"{what} lost positive definiteness") from exc


def sgvi_update(prev: GaussianBelief, z, model: SystemModel, cfg: SgviConfig = SgviConfig(),
                t: int = 1, linearization: Optional[Linearization] = None) -> UpdateResult:
    """One S-GVI time step from ``prev`` given measurement ``z``.

    The iterate starts at ``prev`` itself (mean and precision), ``mu_R`` and
    ``S`` are computed once from ``prev``, and natural-gradient passes run until
    the relative change of the mean (componentwise) and of the precision
    (Frobenius) both drop to ``cfg.epsilon`` or ``cfg.max_iters`` is reached.
    A run that hits the budget returns ``converged=False``.
    """
    start = time.perf_counter()
    z = np.atleast_1d(np.asarray(z, dtype=float))
    lin = linearize_transition(prev, model, t, cfg, linearization)
    S_inv = spd_inverse(lin.S, "S")
    R_inv = spd_inverse(model.measurement.R, "R")
    prior_grad_base = S_inv @ lin.mu_R
    beta = cfg.step_size
    n = prev.n_x
    eye = np.eye(n)

    mu = np.array(prev.mean)
    P = np.array(prev.precision)
    L = np.array(prev.chol)
    cov = np.array(prev.covariance)
    converged = False
    k = 0
    for k in range(1, int(cfg.max_iters) + 1):
        info, grad = expected_measurement_terms(mu, L, z, model, R_inv, cfg.ut_params)
        P_new = symmetrize((1.0 - beta) * P + beta * (info + S_inv))
        Lp = _cholesky(P_new, "precision iterate")
        cov = symmetrize(sla.cho_solve((Lp, True), eye, check_finite=False))
        mu_new = mu + beta * cov @ (grad + prior_grad_base - S_inv @ mu)
        if not np.all(np.isfinite(mu_new)):
            raise NonFiniteValue("S-GVI mean iterate is not finite")
        done = (relative_change(mu_new, mu) <= cfg.epsilon
                and frobenius_change(P_new, P) <= cfg.epsilon)
        mu, P = mu_new, P_new
        L = _cholesky(cov, "covariance iterate")
        if done:
            converged = True
            break
    belief = _from_trusted(mu, cov, P)
    return UpdateResult(belief, k, converged, time.perf_counter() - start)


def iekf_map_update(prev: GaussianBelief, z, model: SystemModel, cfg: SgviConfig = SgviConfig(),
                    t: int = 1) -> UpdateResult:
    """Iterated-EKF step: Taylor prediction, Gauss-Newton MAP correction.

    Stops when the componentwise relative change of the iterate is at most
    ``cfg.epsilon``. The covariance is ``(I - K H) Sigma^-`` at the final
    iterate, evaluated in Joseph form.
    """
    start = time.perf_counter()
    z = np.atleast_1d(np.asarray(z, dtype=float))
    trans, meas = model.transition, model.measurement
    mu_pred = np.atleast_1d(np.asarray(trans.f(prev.mean, t), dtype=float))
    F = np.atleast_2d(np.asarray(trans.jacobian(prev.mean, t), dtype=float))
    P_pred = symmetrize(F @ prev.covariance @ F.T + trans.Q(prev.mean, t))
    R = meas.R
    n = prev.n_x

    def gain(x):
        H = np.atleast_2d(np.asarray(meas.h_jacobian(x), dtype=float))
        PHt = P_pred @ H.T
        S = symmetrize(H @ PHt + R)
        K = sla.cho_solve(sla.cho_factor(S, lower=True), PHt.T).T
        return H, K

    x = mu_pred
    converged = False
    k = 0
    for k in range(1, int(cfg.max_iters) + 1):
        H, K = gain(x)
        hx = np.atleast_1d(np.asarray(meas.h(x), dtype=float))
        x_new = mu_pred + K @ (z - hx - H @ (mu_pred - x))
        if not np.all(np.isfinite(x_new)):
            raise NonFiniteValue("iterated EKF iterate is not finite")
        done = relative_change(x_new, x) <= cfg.epsilon
        x = x_new
        if done:
            converged = True
            break
    H, K = gain(x)
    IKH = np.eye(n) - K @ H
    cov = symmetrize(IKH @ P_pred @ IKH.T + K @ R @ K.T)
    belief = _from_trusted(x, cov, spd_inverse(cov, "posterior covariance"))
    return UpdateResult(belief, k, converged, time.perf_counter() - start)


def information_filter_update(prev: GaussianBelief, z, model: LinearModel) -> GaussianBelief:
    """Exact linear-Gaussian step in canonical form.

    ``P = H^T R^-1 H + M^-1`` and ``mu = P^-1 (H^T R^-1 z + M^-1 A mu_prev)``
    with ``M = A Sigma_prev A^T + Q``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    A, H = model.A, model.H
    M_inv = spd_inverse(A @ prev.covariance @ A.T + model.Q, "predicted covariance")
    HtRi = H.T @ model.R_inv
    P = symmetrize(HtRi @ H + M_inv)
    Lp = _cholesky(P, "posterior precision")
    cov = symmetrize(sla.cho_solve((Lp, True), np.eye(P.shape[0]), check_finite=False))
    mean = sla.cho_solve((Lp, True), HtRi @ z + M_inv @ (A @ prev.mean), check_finite=False)
    if not np.all(np.isfinite(mean)):
        raise NonFiniteValue("information filter mean is not finite")
    return _from_trusted(mean, cov, P)


def linear_cost(theta: GaussianBelief, prev: GaussianBelief, z, model: LinearModel) -> float:
    """KL cost of ``theta`` for a linear-Gaussian step, additive constant dropped.

    ``0.5 tr(R^-1 ((z - H mu)(z - H mu)^T + H Sigma H^T)
    + M^-1 ((mu - A mu_prev)(mu - A mu_prev)^T + Sigma)) + 0.5 ln|Sigma^-1|``
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    A, H = model.A, model.H
    mu, Sigma = theta.mean, theta.covariance
    R_inv = spd_inverse(model.R, "R")
    M_inv = spd_inverse(A @ prev.covariance @ A.T + model.Q, "predicted covariance")
    r = z - H @ mu
    d = mu - A @ prev.mean
    sign, logdet = np.linalg.slogdet(Sigma)
    if sign <= 0:
        raise NotPositiveDefinite("theta covariance is not positive definite")
    quad = (r @ R_inv @ r + np.trace(R_inv @ H @ Sigma @ H.T)
            + d @ M_inv @ d + np.trace(M_inv @ Sigma))
    return float(0.5 * quad - 0.5 * logdet)


@dataclass(eq=False)
class EstimationTrace:
    """Per-step output of one estimator over one measurement sequence.

    ``status`` is ``"ok"`` or ``"failed"``; a failed trace is truncated at the
    step that raised and carries the error text in ``message``.
    """

    estimator: str
    means: np.ndarray
    covariances: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    elapsed: np.ndarray
    status: str = "ok"
    message: str = ""
    seed: Optional[int] = None
    trial: Optional[int] = None

    def __len__(self):
        return self.means.shape[0]

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def belief(self, k: int) -> GaussianBelief:
        return _from_trusted(self.means[k], self.covariances[k],
                             spd_inverse(self.covariances[k]))


def _step(estimator: Estimator, belief, z, model, cfg, t) -> UpdateResult:
    if estimator is Estimator.SGVI:
        return sgvi_update(belief, z, model, cfg, t)
    if estimator is Estimator.SGVI_SLR:
        return sgvi_update(belief, z, model, cfg, t, Linearization.SLR)
    if estimator is Estimator.SGVI_JACOBIAN:
        return sgvi_update(belief, z, model, cfg, t, Linearization.JACOBIAN)
    if estimator is Estimator.MAP:
        return iekf_map_update(belief, z, model, cfg, t)
    start = time.perf_counter()
    post = information_filter_update(belief, z, model.linear)
    return UpdateResult(post, 1, True, time.perf_counter() - start)


def run_sequential(estimator, initial: GaussianBelief, measurements: Sequence,
                   model: SystemModel, cfg: SgviConfig = SgviConfig(),
                   on_error: str = "raise") -> EstimationTrace:
    """Fold one estimator over a measurement sequence.

    Measurement ``k`` (0-based) is processed with time index ``t = k + 1``.
    Steps that exhaust ``max_iters`` are recorded with ``converged=False``.
    With ``on_error="record"`` an :class:`EstimationError` ends the run and
    returns the truncated trace with ``status="failed"``.
    """
    estimator = Estimator(estimator)
    if estimator is Estimator.IEF and model.linear is None:
        raise ValueError("the information filter needs a linear model")
    if len(measurements) == 0:
        raise ValueError("measurement sequence is empty")
    n = initial.n_x
    T = len(measurements)
    means = np.empty((T, n))
    covs = np.empty((T, n, n))
    iters = np.zeros(T, dtype=int)
    conv = np.zeros(T, dtype=bool)
    elapsed = np.zeros(T)
    belief = initial
    status, message, done = "ok", "", T
    for k, z in enumerate(measurements):
        try:
            res = _step(estimator, belief, z, model, cfg, k + 1)
        except EstimationError as exc:
            if on_error != "record":
                raise
            status, message, done = "failed", f"step {k + 1}: {type(exc).__name__}: {exc}", k
            break
        belief = res.belief
        means[k], covs[k] = belief.mean, belief.covariance
        iters[k], conv[k], elapsed[k] = res.iterations, res.converged, res.elapsed
    return EstimationTrace(estimator.value, means[:done], covs[:done], iters[:done],
                           conv[:done], elapsed[:done], status, message)
