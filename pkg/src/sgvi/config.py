"""Experiment configuration files (TOML).

A minimal file names only the scenario; iteration and quadrature settings
default to ``step_size=1``, ``epsilon=0.02``, ``max_iters=50``, ``alpha=1``,
``beta_s=0.1`` and ``kappa=3-n_x``. Example::

    [experiment]
    scenario = "benchmark1d"
    estimators = ["sgvi", "map"]
    trials = 200
    steps = 50
    seed = 1

    [model]
    Q = 1.0
    R = 1.0

Every key is listed in ``docs/config.md`` at the repository root.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigParse, ConfigValidation, EstimationError
from .estimators import Estimator, Linearization, SgviConfig
from .gaussian import belief_from_moments
from .models import (CT_PRIOR_COV, DEFAULT_ANCHORS, LinearModel, SystemModel, benchmark_1d,
                     constant_velocity, coordinated_turn, range_measurements)
from .quadrature import UnscentedParams
from .simulation import Scenario, TurnMismatch

SCENARIOS = ("benchmark1d", "coordinated-turn", "linear", "custom-linear")
ESTIMATORS = tuple(e.value for e in Estimator)

# the {Q, R} grid used for the 1-D benchmark sweep; a choice, not published values
DEFAULT_QR_GRID = tuple((q, r) for q in (1.0, 10.0) for r in (1.0, 0.1))

_SECTIONS = {
    "experiment": {"scenario", "estimators", "trials", "steps", "seed", "output_dir"},
    "model": {"Q", "R", "T", "Q_a", "Q_alpha", "R_sigma", "anchors", "A", "H"},
    "prior": {"mean", "cov_diag", "initial_truth"},
    "mismatch": {"enabled", "segment_steps", "turn_rate_max", "speed_range"},
    "sgvi": {"step_size", "epsilon", "max_iters", "linearization", "alpha", "beta_s", "kappa"},
    "metrics": {"components", "nees_components"},
}


@dataclass
class ExperimentConfig:
    scenario: str
    estimators: List[str]
    trials: int
    steps: int
    seed: int
    output_dir: Optional[str]
    model: Dict[str, Any]
    prior_mean: Optional[np.ndarray]
    prior_cov_diag: Optional[np.ndarray]
    initial_truth: Optional[np.ndarray]
    mismatch: Optional[TurnMismatch]
    sgvi: SgviConfig
    components: Optional[Tuple[int, ...]] = None
    nees_components: Optional[Tuple[int, ...]] = None
    source: str = field(default="", repr=False)

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


def _require(table, key, where):
    if key not in table:
        raise ConfigValidation(f"missing required field '{where}.{key}'")
    return table[key]


def _positive(value, name):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigValidation(f"'{name}' must be a number, got {value!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise ConfigValidation(f"'{name}' must be positive, got {value!r}")
    return v


def _count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigValidation(f"'{name}' must be an integer >= {minimum}, got {value!r}")
    return value


def _matrix(value, name, shape=None):
    try:
        m = np.atleast_2d(np.asarray(value, dtype=float))
    except (TypeError, ValueError):
        raise ConfigValidation(f"'{name}' must be a numeric matrix") from None
    if m.ndim != 2 or (shape is not None and m.shape != shape):
        raise ConfigValidation(f"'{name}' has shape {m.shape}, expected {shape}")
    return m


def _vector(value, name, length=None):
    try:
        v = np.atleast_1d(np.asarray(value, dtype=float))
    except (TypeError, ValueError):
        raise ConfigValidation(f"'{name}' must be a numeric list") from None
    if v.ndim != 1 or (length is not None and v.shape[0] != length):
        raise ConfigValidation(f"'{name}' must be a list of length {length}, got {value!r}")
    return v


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse and validate a TOML experiment description."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParse(f"{source}: {exc}") from exc
    for section, value in raw.items():
        if section not in _SECTIONS:
            raise ConfigValidation(f"unknown section '[{section}]'; valid: {sorted(_SECTIONS)}")
        if not isinstance(value, dict):
            raise ConfigValidation(f"'{section}' must be a table")
        unknown = set(value) - _SECTIONS[section]
        if unknown:
            raise ConfigValidation(
                f"unknown key(s) {sorted(unknown)} in [{section}]; valid: {sorted(_SECTIONS[section])}")

    exp = raw.get("experiment", {})
    scenario = _require(exp, "scenario", "experiment")
    if scenario not in SCENARIOS:
        raise ConfigValidation(f"unknown scenario {scenario!r}; valid: {list(SCENARIOS)}")
    default_est = ["sgvi", "ief"] if scenario in ("linear", "custom-linear") else ["sgvi", "map"]
    estimators = list(exp.get("estimators", default_est))
    if not estimators:
        raise ConfigValidation("'experiment.estimators' must not be empty")
    for e in estimators:
        if e not in ESTIMATORS:
            raise ConfigValidation(f"unknown estimator {e!r}; valid: {list(ESTIMATORS)}")
    if "ief" in estimators and scenario not in ("linear", "custom-linear"):
        raise ConfigValidation("estimator 'ief' needs a linear scenario")
    if len(set(estimators)) != len(estimators):
        raise ConfigValidation("'experiment.estimators' lists an estimator twice")
    trials = _count(exp.get("trials", 100), "experiment.trials")
    steps = _count(exp.get("steps", 50), "experiment.steps")
    seed = exp.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigValidation(f"'experiment.seed' must be a non-negative integer, got {seed!r}")

    model = dict(raw.get("model", {}))
    if scenario == "benchmark1d":
        model = {"Q": _positive(_require(model, "Q", "model"), "model.Q"),
                 "R": _positive(_require(model, "R", "model"), "model.R")}
    elif scenario == "coordinated-turn":
        anchors = _matrix(model.get("anchors", DEFAULT_ANCHORS), "model.anchors")
        if anchors.shape[1] != 2 or anchors.shape[0] < 1:
            raise ConfigValidation("'model.anchors' must be a list of [x, y] pairs")
        model = {"T": _positive(model.get("T", 0.1), "model.T"),
                 "Q_a": _positive(model.get("Q_a", 2.0 ** 2), "model.Q_a"),
                 "Q_alpha": _positive(model.get("Q_alpha", 0.01 ** 2), "model.Q_alpha"),
                 "R_sigma": _positive(model.get("R_sigma", 0.5), "model.R_sigma"),
                 "anchors": anchors}
    elif scenario == "linear":
        model = {"T": _positive(model.get("T", 0.1), "model.T"),
                 "Q": _positive(model.get("Q", 1.0), "model.Q"),
                 "R": _positive(model.get("R", 0.25), "model.R")}
    else:
        A = _matrix(_require(model, "A", "model"), "model.A")
        n = A.shape[0]
        H = _matrix(_require(model, "H", "model"), "model.H")
        model = {"A": _matrix(A, "model.A", (n, n)),
                 "H": _matrix(H, "model.H", (H.shape[0], n)),
                 "Q": _matrix(_require(model, "Q", "model"), "model.Q", (n, n)),
                 "R": _matrix(_require(model, "R", "model"), "model.R", (H.shape[0], H.shape[0]))}

    prior = raw.get("prior", {})
    mean = _vector(prior["mean"], "prior.mean") if "mean" in prior else None
    cov_diag = _vector(prior["cov_diag"], "prior.cov_diag") if "cov_diag" in prior else None
    if cov_diag is not None:
        for i, v in enumerate(cov_diag):
            _positive(v, f"prior.cov_diag[{i}]")
    if scenario == "custom-linear" and (mean is None or cov_diag is None):
        raise ConfigValidation("custom-linear needs 'prior.mean' and 'prior.cov_diag'")
    truth0 = _vector(prior["initial_truth"], "prior.initial_truth") if "initial_truth" in prior else None

    mm = raw.get("mismatch", {})
    mismatch = None
    if mm.get("enabled", False):
        if scenario != "coordinated-turn":
            raise ConfigValidation("[mismatch] is only supported for the coordinated-turn scenario")
        speed = _vector(mm.get("speed_range", [0.5, 1.5]), "mismatch.speed_range", 2)
        if not speed[0] <= speed[1]:
            raise ConfigValidation("'mismatch.speed_range' must be [low, high]")
        mismatch = TurnMismatch(
            segment_steps=_count(mm.get("segment_steps", 20), "mismatch.segment_steps"),
            turn_rate_max=_positive(mm.get("turn_rate_max", 0.2), "mismatch.turn_rate_max"),
            speed_range=(float(speed[0]), float(speed[1])))

    sg = raw.get("sgvi", {})
    try:
        ut = UnscentedParams(alpha=float(sg.get("alpha", 1.0)), beta_s=float(sg.get("beta_s", 0.1)),
                             kappa=None if "kappa" not in sg else float(sg["kappa"]))
        sgvi = SgviConfig(step_size=float(sg.get("step_size", 1.0)),
                          epsilon=float(sg.get("epsilon", 0.02)),
                          max_iters=_count(sg.get("max_iters", 50), "sgvi.max_iters"),
                          ut_params=ut,
                          linearization=sg.get("linearization", "slr"))
    except ConfigValidation:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigValidation(f"[sgvi]: {exc}") from exc

    met = raw.get("metrics", {})
    comps = tuple(int(i) for i in met["components"]) if "components" in met else None
    nees_comps = tuple(int(i) for i in met["nees_components"]) if "nees_components" in met else None

    cfg = ExperimentConfig(
        scenario=scenario, estimators=estimators, trials=trials, steps=steps, seed=seed,
        output_dir=exp.get("output_dir"), model=model, prior_mean=mean, prior_cov_diag=cov_diag,
        initial_truth=truth0, mismatch=mismatch, sgvi=sgvi, components=comps,
        nees_components=nees_comps, source=source)
    # surface dimension errors and non-SPD matrices now rather than mid-run
    sm = build_model(cfg)
    for name, comp in (("metrics.components", comps), ("metrics.nees_components", nees_comps)):
        if comp is not None and any(not 0 <= i < sm.n_x for i in comp):
            raise ConfigValidation(f"'{name}' has indices outside 0..{sm.n_x - 1}")
    if truth0 is not None and truth0.shape[0] != sm.n_x:
        raise ConfigValidation(f"'prior.initial_truth' must have length {sm.n_x}")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def _prior(cfg: ExperimentConfig, default_mean, default_cov):
    n = len(default_mean)
    mean = default_mean if cfg.prior_mean is None else cfg.prior_mean
    cov = default_cov if cfg.prior_cov_diag is None else np.diag(cfg.prior_cov_diag)
    if len(mean) != n or np.shape(cov) != (n, n):
        raise ConfigValidation(f"prior must have dimension {n}")
    return belief_from_moments(mean, cov)


def build_model(cfg: ExperimentConfig) -> SystemModel:
    """System model for a validated configuration."""
    p = cfg.model
    try:
        if cfg.scenario == "benchmark1d":
            base = benchmark_1d(p["Q"], p["R"])
            return dataclasses.replace(base, prior=_prior(cfg, [5.0], [[4.0]]))
        if cfg.scenario == "coordinated-turn":
            return SystemModel(
                transition=coordinated_turn(p["T"], p["Q_a"], p["Q_alpha"]),
                measurement=range_measurements(p["anchors"], p["R_sigma"]),
                prior=_prior(cfg, [4.0, 2.0, 1.0, 0.0, 0.0], CT_PRIOR_COV),
                name="coordinated-turn", position_components=(0, 1))
        if cfg.scenario == "linear":
            lm = constant_velocity(p["T"], p["Q"], p["R"])
            return lm.to_system(_prior(cfg, np.zeros(4), np.eye(4)), name="linear")
        lm = LinearModel(p["A"], p["H"], p["Q"], p["R"])
        return lm.to_system(_prior(cfg, np.zeros(lm.n_x), np.eye(lm.n_x)), name="custom-linear")
    except ConfigValidation:
        raise
    except (EstimationError, ValueError) as exc:
        raise ConfigValidation(f"[model]/[prior]: {exc}") from exc


def build_scenario(cfg: ExperimentConfig) -> Scenario:
    return Scenario(build_model(cfg), steps=cfg.steps, trials=cfg.trials, seed=cfg.seed,
                    initial_truth=cfg.initial_truth, mismatch=cfg.mismatch)


def metric_components(cfg: ExperimentConfig, model: SystemModel):
    """``(rmse_components, nees_components)``; position block when the model has one."""
    default = tuple(model.position_components) or None
    comps = cfg.components if cfg.components is not None else default
    nees_comps = cfg.nees_components if cfg.nees_components is not None else default
    return comps, nees_comps


def describe(cfg: ExperimentConfig) -> str:
    """Human-readable plan of what ``run`` would execute."""
    model = build_model(cfg)
    comps, nees_comps = metric_components(cfg, model)
    ut = cfg.sgvi.ut_params
    lines = [
        f"config:      {cfg.source}",
        f"scenario:    {cfg.scenario} (n_x={model.n_x}, n_z={model.n_z})",
        "model:       " + ", ".join(f"{k}={_fmt(v)}" for k, v in cfg.model.items()),
        f"prior:       mean={_fmt(model.prior.mean)} cov_diag={_fmt(np.diag(model.prior.covariance))}",
        f"truth x0:    {'sampled from prior' if cfg.initial_truth is None else _fmt(cfg.initial_truth)}",
        f"mismatch:    {cfg.mismatch if cfg.mismatch else 'off'}",
        f"estimators:  {', '.join(cfg.estimators)}",
        f"trials:      {cfg.trials} x {cfg.steps} steps, seed={cfg.seed}",
        f"iteration:   step_size={cfg.sgvi.step_size} epsilon={cfg.sgvi.epsilon} "
        f"max_iters={cfg.sgvi.max_iters} linearization={cfg.sgvi.linearization.value}",
        f"unscented:   alpha={ut.alpha} beta_s={ut.beta_s} kappa={ut.kappa_for(model.n_x)}",
        f"metrics:     rmse components={comps or 'all'} nees components={nees_comps or 'all'}",
        f"output:      {cfg.output_dir or '(not set)'}",
    ]
    return "\n".join(lines)


def _fmt(v):
    if isinstance(v, np.ndarray):
        return np.array2string(v, precision=4, separator=",").replace("\n", "")
    return repr(v)


__all__ = ["ExperimentConfig", "parse_config", "load_config", "build_model", "build_scenario",
           "metric_components", "describe", "SCENARIOS", "ESTIMATORS", "DEFAULT_QR_GRID",
           "Linearization"]
