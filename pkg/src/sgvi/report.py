"""CSV writers for experiment results.

Numbers are written with 17 significant digits so a parser recovers every
float64 exactly. ``steps.csv`` and ``summary.csv`` hold only deterministic
quantities; wall-clock measurements go to ``timing.csv`` and
``wallclock.csv``.

``steps.csv`` columns::

    estimator, trial, seed, t, status,
    est_0..est_{n-1}, var_0..var_{n-1}, truth_0..truth_{n-1}, err_0..err_{n-1},
    nees, iterations, converged
"""
from __future__ import annotations

import csv
import os
from typing import Dict, Iterable, List, Sequence

import numpy as np

from .metrics import nees_sequence, total_wall_clock


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def steps_header(n_x: int) -> List[str]:
    cols = ["estimator", "trial", "seed", "t", "status"]
    for prefix in ("est", "var", "truth", "err"):
        cols += [f"{prefix}_{i}" for i in range(n_x)]
    return cols + ["nees", "iterations", "converged"]


def step_rows(results, estimators: Sequence[str], nees_components=None) -> Iterable[List[str]]:
    for res in results:
        truth = res.trial.truth
        for name in estimators:
            tr = res.traces[name]
            n = len(tr)
            nees = nees_sequence(tr, truth[:n], nees_components) if n else []
            var = np.diagonal(tr.covariances, axis1=1, axis2=2)
            for k in range(n):
                row = [name, res.trial.index, res.trial.seed, k + 1, tr.status]
                row += list(tr.means[k]) + list(var[k]) + list(truth[k]) + list(tr.means[k] - truth[k])
                row += [nees[k], tr.iterations[k], tr.converged[k]]
                yield [fmt(v) for v in row]


def _write(path: str, header: Sequence[str], rows: Iterable[Sequence]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_steps(path: str, results, estimators, n_x: int, nees_components=None):
    _write(path, steps_header(n_x), step_rows(results, estimators, nees_components))


def write_table(path: str, rows: Sequence[Dict]):
    header = list(rows[0].keys())
    _write(path, header, ([r[h] for h in header] for r in rows))


def write_timing(out_dir: str, results, estimators):
    _write(os.path.join(out_dir, "timing.csv"), ["estimator", "trial", "t", "step_time_s"],
           ([name, res.trial.index, k + 1, res.traces[name].elapsed[k]]
            for res in results for name in estimators for k in range(len(res.traces[name]))))
    rows = []
    for name in estimators:
        steps = sum(len(r.traces[name]) for r in results)
        total = total_wall_clock(results, name)
        rows.append([name, total, total / max(steps, 1)])
    _write(os.path.join(out_dir, "wallclock.csv"),
           ["estimator", "total_wall_clock_s", "mean_step_s"], rows)
    return {r[0]: r[1] for r in rows}


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def format_table(rows: Sequence[Dict], columns: Sequence[str]) -> str:
    cells = [[c for c in columns]]
    for r in rows:
        cells.append([f"{r[c]:.4f}" if isinstance(r[c], float) else str(r[c]) for c in columns])
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells)
