# %% [markdown]
# # Range-only tracking with a coordinated-turn model
#
# A target with state `[x, y, v, heading, turn_rate]` is observed through
# noisy ranges to three fixed anchors. The truth manoeuvres with
# piecewise-constant speed and turn rate, so the filters' random-walk motion
# model is mismatched. We compare S-GVI with SLR, S-GVI with a Jacobian
# linearization of the transition, and the iterated-EKF MAP estimator.

# %%
import numpy as np

from sgvi import SgviConfig, TurnMismatch, rmse
from sgvi.metrics import chi2_interval, nees_sequence, sigma_bound_violations
from sgvi.models import range_tracking
from sgvi.simulation import Scenario, run_monte_carlo

model = range_tracking()
sc = Scenario(model, steps=100, trials=20, seed=7, mismatch=TurnMismatch())
names = ["sgvi-slr", "sgvi-jacobian", "map"]
results = run_monte_carlo(sc, names, SgviConfig())
truths = [r.trial.truth for r in results]

lo, hi = chi2_interval(2)
for name in names:
    traces = [r.traces[name] for r in results]
    e = rmse(traces, truths, components=(0, 1))
    nees = np.concatenate([nees_sequence(t, x, (0, 1)) for t, x in zip(traces, truths)])
    inside = np.mean((nees >= lo) & (nees <= hi))
    its = np.mean(np.concatenate([t.iterations for t in traces]))
    print(f"{name:14s} position rmse {e:.3f} m, mean NEES {nees.mean():.2f}, "
          f"in [{lo:.3f}, {hi:.3f}] {inside:.0%}, iterations {its:.2f}")

# %% [markdown]
# ## Error against 3-sigma bounds
# Fraction of steps where each state error leaves its own 3-sigma envelope.

# %%
tr = results[0].traces["sgvi-slr"]
rates = sigma_bound_violations(tr, results[0].trial.truth)
print({k: round(float(v), 3) for k, v in zip(["x", "y", "v", "heading", "turn"], rates)})

# %% [markdown]
# The filters assume the turn rate drifts as a slow random walk
# (`Q_alpha = 1e-4`), while the truth switches it abruptly every 20 steps.
# Heading and turn-rate errors therefore sit far outside their bounds and the
# position NEES is well above the 2-dof interval: all three estimators are
# overconfident in the same way under this mismatch.
