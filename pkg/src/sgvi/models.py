"""System models: transition / measurement descriptions and benchmark models.

All state functions are vectorized over leading axes: ``f(x, t)`` accepts an
array of shape ``(..., n_x)`` and ``h_jacobian`` returns ``(..., n_z, n_x)``.
Model callables are module-level functions bound with
:func:`functools.partial`, so models pickle cleanly.

The time index passed to ``f`` and ``Q`` is the index ``t`` of the state being
produced, i.e. ``x_t = f(x_{t-1}, t) + v_{t-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AnchorCoincidence, DimensionMismatch
from .gaussian import GaussianBelief, belief_from_moments, spd_inverse, sqrt_factor

# Q jitter for the rank-2 coordinated-turn process noise
CT_JITTER = 1e-12
# below this |w| the coordinated-turn step uses the straight-line limit
CT_SMALL_TURN = 1e-6


def central_difference_jacobian(fn: Callable[[np.ndarray], np.ndarray],
                                x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Jacobian of ``fn`` at ``x`` by central differences.

    The step for component ``i`` is ``rel_step * (1 + |x_i|)``.
    """
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(fn(x))
    jac = np.empty((f0.shape[0], x.shape[0]))
    for i in range(x.shape[0]):
        step = rel_step * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        jac[:, i] = (np.atleast_1d(fn(xp)) - np.atleast_1d(fn(xm))) / (2 * step)
    return jac


@dataclass(frozen=True)
class TransitionModel:
    """``x_t ~ N(f(x_{t-1}, t), Q(x_{t-1}, t))``."""

    f: Callable
    Q: Callable
    n_x: int
    f_jacobian: Optional[Callable] = None

    def jacobian(self, x, t) -> np.ndarray:
        if self.f_jacobian is not None:
            return np.atleast_2d(self.f_jacobian(x, t))
        return central_difference_jacobian(lambda y: self.f(y, t), x)


@dataclass(frozen=True)
class MeasurementModel:
    """``z_t ~ N(h(x_t), R)``."""

    h: Callable
    h_jacobian: Callable
    R: np.ndarray
    n_z: int

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        if R.shape != (self.n_z, self.n_z):
            raise DimensionMismatch(f"R is {R.shape}, expected {(self.n_z, self.n_z)}")
        sqrt_factor(R)
        object.__setattr__(self, "R", R)


@dataclass(frozen=True, eq=False)
class LinearModel:
    """``x_t ~ N(A x_{t-1}, Q)``, ``z_t ~ N(H x_t, R)``."""

    A: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    R_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A, H, Q, R = (np.atleast_2d(np.asarray(m, dtype=float))
                      for m in (self.A, self.H, self.Q, self.R))
        n_x, n_z = A.shape[0], H.shape[0]
        if A.shape != (n_x, n_x) or H.shape != (n_z, n_x) \
                or Q.shape != (n_x, n_x) or R.shape != (n_z, n_z):
            raise DimensionMismatch(
                f"inconsistent linear model: A{A.shape} H{H.shape} Q{Q.shape} R{R.shape}")
        sqrt_factor(Q)
        sqrt_factor(R)
        for name, m in zip("AHQR", (A, H, Q, R)):
            object.__setattr__(self, name, m)
        object.__setattr__(self, "R_inv", spd_inverse(R, "R"))

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_z(self) -> int:
        return self.H.shape[0]

    def to_system(self, prior: Optional[GaussianBelief] = None, name: str = "linear") -> SystemModel:
        transition = TransitionModel(
            f=partial(_linear_map, self.A), Q=partial(_constant, self.Q),
            n_x=self.n_x, f_jacobian=partial(_constant, self.A))
        measurement = MeasurementModel(
            h=partial(_linear_map, self.H), h_jacobian=partial(_linear_jacobian, self.H),
            R=self.R, n_z=self.n_z)
        return SystemModel(transition, measurement, prior=prior, linear=self, name=name)


@dataclass(frozen=True, eq=False)
class SystemModel:
    transition: TransitionModel
    measurement: MeasurementModel
    prior: Optional[GaussianBelief] = None
    linear: Optional[LinearModel] = None
    name: str = "custom"
    position_components: Sequence[int] = field(default=())

    def __post_init__(self):
        if self.prior is not None and self.prior.n_x != self.transition.n_x:
            raise DimensionMismatch("prior dimension does not match the transition model")

    @property
    def n_x(self) -> int:
        return self.transition.n_x

    @property
    def n_z(self) -> int:
        return self.measurement.n_z


def _constant(value, x=None, t=None):
    return value


def _linear_map(M, x, t=None):
    return np.asarray(x, dtype=float) @ M.T


def _linear_jacobian(M, x):
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(M, x.shape[:-1] + M.shape)


# -- 1-D benchmark -----------------------------------------------------------

def _bench_f(x, t):
    x = np.asarray(x, dtype=float)
    return 0.9 * x + 10.0 * x / (1.0 + x ** 2) + 8.0 * np.cos(1.2 * (t - 1))


def _bench_f_jacobian(x, t):
    x = np.asarray(x, dtype=float)
    return (0.9 + 10.0 * (1.0 - x ** 2) / (1.0 + x ** 2) ** 2)[..., None]


def _bench_h(x):
    return 0.05 * np.asarray(x, dtype=float) ** 3


def _bench_h_jacobian(x):
    x = np.asarray(x, dtype=float)
    return (0.15 * x ** 2)[..., None]


def benchmark_1d(Q: float, R: float) -> SystemModel:
    """Scalar benchmark with a cubic measurement and prior ``N(5, 2^2)``.

    ``f(x, t) = 0.9 x + 10 x / (1 + x^2) + 8 cos(1.2 (t - 1))`` and
    ``h(x) = 0.05 x^3``.
    """
    if not (Q > 0 and R > 0):
        raise ValueError(f"Q and R must be positive, got Q={Q}, R={R}")
    q = np.array([[float(Q)]])
    transition = TransitionModel(_bench_f, partial(_constant, q), 1, _bench_f_jacobian)
    measurement = MeasurementModel(_bench_h, _bench_h_jacobian, np.array([[float(R)]]), 1)
    prior = belief_from_moments([5.0], [[4.0]])
    return SystemModel(transition, measurement, prior=prior, name="benchmark1d")


# -- coordinated turn ----------------------------------------------------------

def _sinc(a):
    # sin(a)/a, exact at 0
    return np.sinc(np.asarray(a) / np.pi)


def _dsinc(a):
    a = np.asarray(a, dtype=float)
    small = np.abs(a) < 1e-2
    safe = np.where(small, 1.0, a)
    direct = (safe * np.cos(safe) - np.sin(safe)) / safe ** 2
    series = -a / 3.0 + a ** 3 / 30.0 - a ** 5 / 840.0
    return np.where(small, series, direct)


def _ct_step_length(w, T):
    """``2 sin(w T / 2) / w`` with the limit ``T`` for tiny ``|w|``."""
    w = np.asarray(w, dtype=float)
    return np.where(np.abs(w) < CT_SMALL_TURN, T, T * _sinc(0.5 * w * T))


def _ct_f(T, x, t=None):
    x = np.asarray(x, dtype=float)
    px, py, v, h, w = (x[..., i] for i in range(5))
    s = _ct_step_length(w, T)
    phi = h + 0.5 * w * T
    out = np.empty_like(x)
    out[..., 0] = px + v * s * np.cos(phi)
    out[..., 1] = py + v * s * np.sin(phi)
    out[..., 2] = v
    out[..., 3] = h + w * T
    out[..., 4] = w
    return out


def _ct_jacobian(T, x, t=None):
    x = np.asarray(x, dtype=float)
    v, h, w = x[2], x[3], x[4]
    a = 0.5 * w * T
    s = float(_ct_step_length(w, T))
    ds = 0.5 * T * T * float(_dsinc(a))
    phi = h + a
    c, sn = np.cos(phi), np.sin(phi)
    J = np.eye(5)
    J[0, 2] = s * c
    J[0, 3] = -v * s * sn
    J[0, 4] = v * (ds * c - 0.5 * T * s * sn)
    J[1, 2] = s * sn
    J[1, 3] = v * s * c
    J[1, 4] = v * (ds * sn + 0.5 * T * s * c)
    J[3, 4] = T
    return J


def _ct_noise_gain(T, h):
    G = np.zeros((5, 2))
    G[0, 0] = 0.5 * T * T * np.cos(h)
    G[1, 0] = 0.5 * T * T * np.sin(h)
    G[2, 0] = T
    G[3, 1] = 0.5 * T * T
    G[4, 1] = T
    return G


def _ct_Q(T, Q_a, Q_alpha, jitter, x, t=None):
    x = np.asarray(x, dtype=float)
    G = _ct_noise_gain(T, x[3])
    return G @ np.diag([Q_a, Q_alpha]) @ G.T + jitter * np.eye(5)


def coordinated_turn(T: float, Q_a: float, Q_alpha: float,
                     jitter: float = CT_JITTER) -> TransitionModel:
    """Coordinated-turn model with polar velocity, state ``[x, y, v, h, w]``.

    The process noise is driven by linear (``Q_a``) and rotational
    (``Q_alpha``) acceleration and is rank two; ``jitter * I`` is added so it
    is strictly positive definite.
    """
    if not (T > 0 and Q_a > 0 and Q_alpha > 0):
        raise ValueError(f"T, Q_a, Q_alpha must be positive, got {T}, {Q_a}, {Q_alpha}")
    return TransitionModel(
        f=partial(_ct_f, float(T)),
        Q=partial(_ct_Q, float(T), float(Q_a), float(Q_alpha), float(jitter)),
        n_x=5,
        f_jacobian=partial(_ct_jacobian, float(T)),
    )


# -- range-only measurements ---------------------------------------------------

def _range_h(anchors, pos_idx, x):
    x = np.asarray(x, dtype=float)
    p = x[..., list(pos_idx)]
    return np.linalg.norm(p[..., None, :] - anchors, axis=-1)


def _range_jacobian(anchors, pos_idx, n_x, x):
    x = np.asarray(x, dtype=float)
    p = x[..., list(pos_idx)]
    diff = p[..., None, :] - anchors            # (..., L, 2)
    dist = np.linalg.norm(diff, axis=-1, keepdims=True)
    if np.any(dist < 1e-9):
        raise AnchorCoincidence("position coincides with an anchor; range Jacobian undefined")
    J = np.zeros(x.shape[:-1] + (anchors.shape[0], n_x))
    J[..., list(pos_idx)] = diff / dist
    return J


def range_measurements(anchors: Sequence[Sequence[float]], R_sigma: float,
                       n_x: int = 5, position_index: Sequence[int] = (0, 1)) -> MeasurementModel:
    """Line-of-sight ranges ``||anchor_l - P||`` to every anchor.

    ``P`` is read from ``position_index`` of the state and the noise is
    ``R = R_sigma^2 I``.
    """
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    if anchors.shape[0] < 1 or anchors.shape[1] != 2:
        raise DimensionMismatch(f"anchors must be an (L, 2) array, got {anchors.shape}")
    if not R_sigma > 0:
        raise ValueError(f"R_sigma must be positive, got {R_sigma}")
    pos = tuple(int(i) for i in position_index)
    L = anchors.shape[0]
    return MeasurementModel(
        h=partial(_range_h, anchors, pos),
        h_jacobian=partial(_range_jacobian, anchors, pos, n_x),
        R=float(R_sigma) ** 2 * np.eye(L),
        n_z=L,
    )


DEFAULT_ANCHORS = ((0.0, 0.0), (8.0, 0.0), (4.0, 6.0))
# initial covariance used for the range-only experiments
CT_PRIOR_COV = np.diag([0.05 ** 2, 0.05 ** 2, 0.01 ** 2, 0.01 ** 2, 0.01 ** 2])


def range_tracking(T: float = 0.1, Q_a: float = 2.0 ** 2, Q_alpha: float = 0.01 ** 2,
                   R_sigma: float = 0.5, anchors=DEFAULT_ANCHORS,
                   prior_mean=(4.0, 2.0, 1.0, 0.0, 0.0), prior_cov=CT_PRIOR_COV) -> SystemModel:
    """Coordinated-turn target observed by range-only anchors."""
    return SystemModel(
        transition=coordinated_turn(T, Q_a, Q_alpha),
        measurement=range_measurements(anchors, R_sigma),
        prior=belief_from_moments(prior_mean, prior_cov),
        name="coordinated-turn",
        position_components=(0, 1),
    )


# -- linear models -------------------------------------------------------------

def constant_velocity(T: float = 0.1, q: float = 1.0, r: float = 0.25) -> LinearModel:
    """2-D constant-velocity model, state ``[x, y, vx, vy]``, position measured."""
    A = np.eye(4)
    A[0, 2] = A[1, 3] = T
    G = np.array([[0.5 * T * T, 0], [0, 0.5 * T * T], [T, 0], [0, T]])
    Q = q * G @ G.T + 1e-6 * np.eye(4)
    H = np.zeros((2, 4))
    H[0, 0] = H[1, 1] = 1.0
    return LinearModel(A, H, Q, r * np.eye(2))


def random_spd(rng: np.random.Generator, n: int, scale: float = 1.0, floor: float = 0.1) -> np.ndarray:
    M = rng.standard_normal((n, n))
    return scale * (M @ M.T / n + floor * np.eye(n))


def random_linear_model(rng: np.random.Generator, n_x: int, n_z: int) -> LinearModel:
    """Random stable-ish linear-Gaussian model for property checks."""
    A = rng.standard_normal((n_x, n_x))
    A *= 0.95 / max(1e-12, np.max(np.abs(np.linalg.eigvals(A))))
    H = rng.standard_normal((n_z, n_x))
    return LinearModel(A, H, random_spd(rng, n_x, 0.5), random_spd(rng, n_z, 0.5))
