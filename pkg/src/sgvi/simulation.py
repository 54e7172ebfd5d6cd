"""Ground-truth simulation and paired Monte Carlo runs.

Every trial draws from its own random stream derived from
``(seed, trial_index)``, so trials are reproducible and independent of the
order (or thread) they run in.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import NonFiniteValue
from .estimators import EstimationTrace, Estimator, SgviConfig, run_sequential
from .gaussian import sqrt_factor
from .models import SystemModel


@dataclass(frozen=True)
class TurnMismatch:
    """Truth generator with piecewise-constant speed and turn rate.

    Every ``segment_steps`` steps the truth draws a new turn rate from
    ``U(-turn_rate_max, turn_rate_max)`` and a new speed from
    ``U(*speed_range)``, then moves along the noise-free coordinated-turn
    kinematics. Filters still assume the random-walk coordinated-turn model,
    so their motion model cannot follow these manoeuvres exactly.
    """

    segment_steps: int = 20
    turn_rate_max: float = 0.2
    speed_range: tuple = (0.5, 1.5)


@dataclass(frozen=True, eq=False)
class Scenario:
    model: SystemModel
    steps: int
    trials: int
    seed: int = 0
    initial_truth: Optional[np.ndarray] = None   # None: sample from model.prior
    mismatch: Optional[TurnMismatch] = None

    def __post_init__(self):
        if int(self.steps) < 1 or int(self.trials) < 1:
            raise ValueError(f"steps and trials must be >= 1, got {self.steps}, {self.trials}")
        if self.initial_truth is None and self.model.prior is None:
            raise ValueError("scenario needs initial_truth or a model prior")


@dataclass(frozen=True, eq=False)
class Trial:
    truth: np.ndarray         # (steps, n_x), states x_1..x_T
    measurements: np.ndarray  # (steps, n_z)
    seed: int
    index: int
    initial: np.ndarray       # x_0


def trial_rng(seed: int, trial_index: int):
    """Random generator and recorded 64-bit seed for one trial."""
    ss = np.random.SeedSequence([int(seed) & (2 ** 64 - 1), int(trial_index)])
    return np.random.default_rng(ss), int(ss.generate_state(1, np.uint64)[0])


def sample_gaussian(rng: np.random.Generator, mean, cov) -> np.ndarray:
    """``mean + L e`` with ``L`` the Cholesky factor of ``cov``."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    return mean + sqrt_factor(cov) @ rng.standard_normal(mean.shape[0])


def simulate_trial(scenario: Scenario, trial_index: int) -> Trial:
    """Roll the generative model forward for ``scenario.steps`` steps.

    ``x_t = f(x_{t-1}, t) + v`` with ``v ~ N(0, Q(x_{t-1}, t))`` and
    ``z_t = h(x_t) + r`` with ``r ~ N(0, R)``; under ``scenario.mismatch`` the
    truth follows :class:`TurnMismatch` instead.
    """
    model = scenario.model
    rng, seed = trial_rng(scenario.seed, trial_index)
    if scenario.initial_truth is None:
        x = sample_gaussian(rng, model.prior.mean, model.prior.covariance)
    else:
        x = np.array(scenario.initial_truth, dtype=float)
    x0 = x.copy()
    trans, meas = model.transition, model.measurement
    R_chol = sqrt_factor(meas.R)
    mm = scenario.mismatch
    truth = np.empty((scenario.steps, model.n_x))
    zs = np.empty((scenario.steps, model.n_z))
    for k in range(scenario.steps):
        t = k + 1
        if mm is None:
            x = np.asarray(trans.f(x, t), dtype=float) + sqrt_factor(trans.Q(x, t)) @ rng.standard_normal(model.n_x)
        else:
            if k % mm.segment_steps == 0:
                x = x.copy()
                x[4] = rng.uniform(-mm.turn_rate_max, mm.turn_rate_max)
                x[2] = rng.uniform(*mm.speed_range)
            x = np.asarray(trans.f(x, t), dtype=float)
        z = np.atleast_1d(np.asarray(meas.h(x), dtype=float)) + R_chol @ rng.standard_normal(model.n_z)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
            raise NonFiniteValue(f"simulation diverged at step {t}")
        truth[k], zs[k] = x, z
    return Trial(truth, zs, seed, trial_index, x0)


def measurement_digest(trial: Trial) -> str:
    return hashlib.sha256(np.ascontiguousarray(trial.measurements).tobytes()).hexdigest()


@dataclass(eq=False)
class TrialResult:
    trial: Trial
    traces: Dict[str, EstimationTrace] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(tr.ok for tr in self.traces.values())


def run_trial(scenario: Scenario, trial_index: int, estimators: Sequence,
              cfg: SgviConfig = SgviConfig()) -> TrialResult:
    """Simulate one trial and run every estimator on the same measurements."""
    trial = simulate_trial(scenario, trial_index)
    out = TrialResult(trial)
    for est in estimators:
        est = Estimator(est)
        trace = run_sequential(est, scenario.model.prior, trial.measurements,
                               scenario.model, cfg, on_error="record")
        trace.seed, trace.trial = trial.seed, trial_index
        out.traces[est.value] = trace
    return out


def run_monte_carlo(scenario: Scenario, estimators: Sequence,
                    cfg: SgviConfig = SgviConfig(), threads: int = 1,
                    trial_indices: Optional[Sequence[int]] = None) -> List[TrialResult]:
    """Paired Monte Carlo: every estimator sees each trial's measurements.

    Results come back in trial order whatever ``threads`` is.
    """
    indices = range(scenario.trials) if trial_indices is None else trial_indices
    work = lambda i: run_trial(scenario, i, estimators, cfg)  # noqa: E731
    if threads <= 1:
        return [work(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, indices))


def experiment_digest(results: Sequence[TrialResult]) -> str:
    """SHA-256 over every trial's truth, measurements and estimator outputs.

    Wall-clock timings are excluded.
    """
    h = hashlib.sha256()
    for res in results:
        h.update(res.trial.truth.tobytes())
        h.update(res.trial.measurements.tobytes())
        for name in sorted(res.traces):
            tr = res.traces[name]
            h.update(name.encode())
            for arr in (tr.means, tr.covariances, tr.iterations, tr.converged):
                h.update(np.ascontiguousarray(arr).tobytes())
            h.update(tr.status.encode())
    return h.hexdigest()
