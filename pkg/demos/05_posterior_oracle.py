# %% [markdown]
# # One S-GVI step against a brute-force posterior
#
# For a scalar state the exact filtering density can be tabulated: integrate
# the transition over the previous belief with high-order Gauss-Hermite
# quadrature, multiply by the likelihood, and search a dense `(mu, ln var)`
# grid for the Gaussian with the smallest KL divergence to it.

# %%
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests"))
from oracles import kl_grid_minimizer_1d, log_exact_predictive_1d  # noqa: E402

from sgvi import SgviConfig, belief_from_moments, benchmark_1d, iekf_map_update, sgvi_update  # noqa: E402
from sgvi.models import _bench_f  # noqa: E402

Q = R = 1.0
model = benchmark_1d(Q, R)
cases = [(4.1, 0.05, 7, 4.0), (2.0, 0.3, 5, 8.0), (-3.0, 0.2, 12, -1.0)]
for pm, pv, t, z in cases:
    prev = belief_from_moments([pm], [[pv]])

    def logp(x):
        return -0.5 * (z - 0.05 * x ** 3) ** 2 / R + log_exact_predictive_1d(
            x, lambda y: _bench_f(y, t), pm, pv, Q)

    mu, lv = kl_grid_minimizer_1d(logp)
    s = sgvi_update(prev, [z], model, SgviConfig(epsilon=1e-10, max_iters=500), t=t).belief
    m = iekf_map_update(prev, [z], model, SgviConfig(epsilon=1e-10), t=t).belief
    print(f"t={t:2d} z={z:5.1f}: oracle mu={mu:7.3f} var={np.exp(lv):.4f} | "
          f"S-GVI mu={s.mean[0]:7.3f} var={s.covariance[0, 0]:.4f} | "
          f"MAP mu={m.mean[0]:7.3f} var={m.covariance[0, 0]:.4f}")
