# %% [markdown]
# # The 1-D cubic-measurement benchmark
#
# `x_t = 0.9 x + 10 x / (1 + x^2) + 8 cos(1.2 (t - 1)) + v`, `z_t = 0.05 x^3 + r`.
# The cubic measurement is nearly flat around the origin, so a single
# linearization point can be badly misleading there. We compare S-GVI with the
# iterated-EKF MAP estimator on the same simulated measurements.

# %%
import numpy as np

from sgvi import SgviConfig, benchmark_1d, rmse
from sgvi.config import DEFAULT_QR_GRID
from sgvi.simulation import Scenario, run_monte_carlo

TRIALS = 50
for i, (Q, R) in enumerate(DEFAULT_QR_GRID):
    sc = Scenario(benchmark_1d(Q, R), steps=50, trials=TRIALS, seed=10 + i)
    results = run_monte_carlo(sc, ["sgvi", "map"], SgviConfig())
    truths = [r.trial.truth for r in results]
    row = []
    for name in ("sgvi", "map"):
        traces = [r.traces[name] for r in results]
        its = np.mean(np.concatenate([t.iterations for t in traces]))
        row.append(f"{name} rmse={rmse(traces, truths):.3f} iters={its:.2f}")
    print(f"Q={Q:<4g} R={R:<4g}  " + "   ".join(row))

# %% [markdown]
# S-GVI spends more iterations per step here because it re-evaluates the
# sigma-point expectations on every pass. The gains in RMSE over the
# Gauss-Newton MAP iteration are modest on this grid; see the project notes
# for the comparison against larger published gaps.
