"""Command-line entry point.

::

    sgvi run <config> [--threads N] [--seed S] [--out DIR]
    sgvi compare-linearization <config> [...]
    sgvi validate <config>

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

from . import report
from .config import build_scenario, describe, load_config, metric_components
from .errors import ConfigError, EstimationError
from .metrics import summarize
from .simulation import run_monte_carlo

log = logging.getLogger("sgvi")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

COMPARE_ROWS = (("sgvi-slr", "S-GVI (w/ SLR)"),
                ("sgvi-jacobian", "S-GVI (w/ Jacobian)"),
                ("map", "MAP"))

SUMMARY_COLUMNS = ["estimator", "trials", "failed", "rmse", "mean_nees", "mean_iterations",
                   "nonconverged_steps"]


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = cfg.replace(seed=args.seed)
    if getattr(args, "out", None):
        cfg = cfg.replace(output_dir=args.out)
    return cfg


def _out_dir(cfg) -> str:
    out = cfg.output_dir or "sgvi-out"
    os.makedirs(out, exist_ok=True)
    return out


def _execute(cfg, estimators, threads):
    scenario = build_scenario(cfg)
    comps, nees_comps = metric_components(cfg, scenario.model)
    results = run_monte_carlo(scenario, estimators, cfg.sgvi, threads=threads)
    return scenario, results, comps, nees_comps


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    scenario, results, comps, nees_comps = _execute(cfg, cfg.estimators, args.threads)
    reference = "ief" if "ief" in cfg.estimators else None
    rows = summarize(results, cfg.estimators, comps, nees_comps, reference=reference)
    report.write_steps(os.path.join(out, "steps.csv"), results, cfg.estimators,
                       scenario.model.n_x, nees_comps)
    report.write_table(os.path.join(out, "summary.csv"), rows)
    wall = report.write_timing(out, results, cfg.estimators)
    columns = SUMMARY_COLUMNS + ([f"max_dev_vs_{reference}"] if reference else [])
    for r in rows:
        r["wall_clock_s"] = wall[r["estimator"]]
    print(report.format_table(rows, columns + ["wall_clock_s"]))
    print(f"wrote {out}/steps.csv, summary.csv, timing.csv, wallclock.csv")
    return EXIT_OK


def cmd_compare_linearization(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    names = [n for n, _ in COMPARE_ROWS]
    scenario, results, comps, nees_comps = _execute(cfg, names, args.threads)
    rows = summarize(results, names, comps, nees_comps)
    table = [{"method": label, "rmse": r["rmse"], "failed": r["failed"]}
             for (_, label), r in zip(COMPARE_ROWS, rows)]
    report.write_table(os.path.join(out, "compare.csv"), table)
    report.write_steps(os.path.join(out, "steps.csv"), results, names,
                       scenario.model.n_x, nees_comps)
    print(report.format_table(table, ["method", "rmse", "failed"]))
    print(f"wrote {out}/compare.csv, steps.csv")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args)
    print(describe(cfg))
    print("config OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgvi", description="Sequential Gaussian variational inference experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
            ("run", cmd_run, "run an experiment and write steps.csv / summary.csv"),
            ("compare-linearization", cmd_compare_linearization,
             "S-GVI with SLR vs Jacobian marginalization, plus MAP"),
            ("validate", cmd_validate, "check a config and print the plan")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        if name != "validate":
            p.add_argument("--threads", type=int, default=1)
            p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="override experiment.seed")
        p.set_defaults(func=fn)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EstimationError, OSError, ValueError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
