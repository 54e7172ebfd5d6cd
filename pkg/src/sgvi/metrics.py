"""Accuracy and consistency metrics: RMSE, NEES, k-sigma bound violations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import LengthMismatch, NotPositiveDefinite
from .gaussian import GaussianBelief
from .estimators import EstimationTrace


def _components(n: int, components) -> np.ndarray:
    return np.arange(n) if components is None or len(components) == 0 \
        else np.asarray(components, dtype=int)


def _means(trace) -> np.ndarray:
    return trace.means if isinstance(trace, EstimationTrace) else np.asarray(trace, dtype=float)


@dataclass(frozen=True, eq=False)
class StepMetrics:
    error: np.ndarray
    position_error_norm: Optional[float]
    nees: float
    in_3sigma: np.ndarray


def squared_errors(traces: Sequence, truths: Sequence, components=None) -> np.ndarray:
    """Squared error norms, one per (trial, step), flattened."""
    if len(traces) != len(truths):
        raise LengthMismatch(f"{len(traces)} traces but {len(truths)} truths")
    out = []
    for tr, truth in zip(traces, truths):
        est = _means(tr)
        truth = np.asarray(truth, dtype=float)
        if est.shape != truth.shape:
            raise LengthMismatch(f"estimate shape {est.shape} != truth shape {truth.shape}")
        idx = _components(truth.shape[1], components)
        e = est[:, idx] - truth[:, idx]
        out.append(np.sum(e * e, axis=1))
    return np.concatenate(out) if out else np.empty(0)


def rmse(traces: Sequence, truths: Sequence, components=None) -> float:
    """Root of the mean squared error norm over all trials and steps.

    ``components`` restricts the error to a subset of state indices (e.g.
    ``(0, 1)`` for 2-D position); ``None`` uses the whole state.
    """
    return float(np.sqrt(np.mean(squared_errors(traces, truths, components))))


def nees(estimate: GaussianBelief, truth, components=None) -> float:
    """``e^T Sigma_c^-1 e`` on the selected components."""
    idx = _components(estimate.n_x, components)
    e = estimate.mean[idx] - np.asarray(truth, dtype=float)[idx]
    return float(_nees_values(e[None], estimate.covariance[np.ix_(idx, idx)][None])[0])


def _nees_values(errors: np.ndarray, covs: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(covs)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("marginal covariance is not positive definite") from exc
    y = np.linalg.solve(L, errors[..., None])[..., 0]
    return np.sum(y * y, axis=-1)


def nees_sequence(trace: EstimationTrace, truth, components=None) -> np.ndarray:
    """Per-step NEES of a trace against its truth."""
    truth = np.asarray(truth, dtype=float)
    if len(trace) != truth.shape[0]:
        raise LengthMismatch(f"trace has {len(trace)} steps, truth {truth.shape[0]}")
    idx = _components(truth.shape[1], components)
    e = trace.means[:, idx] - truth[:, idx]
    return _nees_values(e, trace.covariances[:, idx][:, :, idx])


def chi2_interval(dof: int, significance: float = 0.05):
    """Two-sided chi-square acceptance interval for a single NEES sample."""
    return (float(stats.chi2.ppf(significance / 2, dof)),
            float(stats.chi2.ppf(1 - significance / 2, dof)))


def sigma_bound_violations(trace: EstimationTrace, truth, k: float = 3.0) -> np.ndarray:
    """Fraction of steps with ``|error_i| > k sqrt(Sigma_ii)``, per component."""
    truth = np.asarray(truth, dtype=float)
    if len(trace) != truth.shape[0]:
        raise LengthMismatch(f"trace has {len(trace)} steps, truth {truth.shape[0]}")
    err = np.abs(trace.means - truth)
    sd = np.sqrt(np.maximum(np.diagonal(trace.covariances, axis1=1, axis2=2), 0.0))
    return np.mean(err > k * sd, axis=0)


def step_metrics(estimate: GaussianBelief, truth, position_components=None) -> StepMetrics:
    truth = np.asarray(truth, dtype=float)
    e = estimate.mean - truth
    sd = np.sqrt(np.diag(estimate.covariance))
    pos = None
    if position_components:
        pos = float(np.linalg.norm(e[list(position_components)]))
    return StepMetrics(e, pos, nees(estimate, truth, position_components), np.abs(e) <= 3 * sd)


def summarize(results, estimators: Sequence[str], components=None,
              nees_components=None, reference: Optional[str] = None) -> List[Dict]:
    """Table-style summary per estimator over a list of trial results.

    Failed trials are left out of that estimator's aggregates and counted in
    ``failed``. When ``reference`` names one of the estimators, every row
    carries the largest absolute mean/covariance deviation from it.
    """
    rows = []
    for name in estimators:
        ok = [r for r in results if r.traces[name].ok]
        traces = [r.traces[name] for r in ok]
        truths = [r.trial.truth for r in ok]
        row = {
            "estimator": name,
            "trials": len(results),
            "failed": len(results) - len(ok),
            "rmse": rmse(traces, truths, components) if ok else float("nan"),
            "mean_nees": float(np.mean(np.concatenate(
                [nees_sequence(t, x, nees_components) for t, x in zip(traces, truths)])))
            if ok else float("nan"),
            "mean_iterations": float(np.mean(np.concatenate([t.iterations for t in traces])))
            if ok else float("nan"),
            "nonconverged_steps": int(sum(np.sum(~t.converged) for t in traces)),
        }
        if reference is not None:
            dev = 0.0
            for r in ok:
                ref = r.traces[reference]
                tr = r.traces[name]
                if ref.ok and len(ref) == len(tr):
                    dev = max(dev, float(np.max(np.abs(tr.means - ref.means))),
                              float(np.max(np.abs(tr.covariances - ref.covariances))))
            row["max_dev_vs_" + reference] = dev
        rows.append(row)
    return rows


def total_wall_clock(results, name: str) -> float:
    return float(sum(np.sum(r.traces[name].elapsed) for r in results))
