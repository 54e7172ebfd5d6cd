# %% [markdown]
# # Sigma points and statistical linear regression
#
# The unscented rule with `alpha=1`, `kappa=3-n_x` places `2 n_x + 1` nodes
# around the mean. In one dimension it is 3-point Gauss-Hermite, so Gaussian
# expectations of polynomials up to degree five come out exact.

# %%
import numpy as np

from sgvi import UnscentedParams, belief_from_moments, expect, jacobian_linearize, slr_linearize
from sgvi.quadrature import sigma_points

s = sigma_points([0.0], [[1.0]])
print("nodes  ", s.points[:, 0])
print("weights", s.mean_weights)
print("E[x^2]        =", expect(lambda x: x[0] ** 2, s))
print("E[(x^2-1)^2]  =", expect(lambda x: (x[0] ** 2 - 1) ** 2, s))

# %% [markdown]
# ## Moments in several dimensions
# First and second moments are reproduced for any mean and covariance.

# %%
rng = np.random.default_rng(0)
mean = rng.standard_normal(3)
a = rng.standard_normal((3, 3))
cov = a @ a.T + 0.1 * np.eye(3)
s3 = sigma_points(mean, cov)
print("mean error      ", np.max(np.abs(expect(lambda x: x, s3) - mean)))
print("covariance error", np.max(np.abs(expect(lambda x: np.outer(x - mean, x - mean), s3) - cov)))

# %% [markdown]
# ## SLR versus a Taylor expansion
# For `f(x) = x^2` under `N(0, 1)` the best affine fit is flat (`F = 0`) and the
# predictive variance is `Var f + Q = 2 + 1 = 3`. A first-order expansion at
# the mean sees only `Q`. The covariance weights carry the extra `beta_s`
# term, so the default scaling reports 3.1 rather than 3.

# %%
prev = belief_from_moments([0.0], [[1.0]])
exact = slr_linearize(lambda x: x ** 2, [[1.0]], prev, UnscentedParams(beta_s=0.0))
default = slr_linearize(lambda x: x ** 2, [[1.0]], prev)
taylor = jacobian_linearize(lambda x: x ** 2, lambda x: 2 * x[None], [[1.0]], prev)
print(f"SLR (beta_s=0):   mu_R={exact.mu_R[0]:.3f} S={exact.S[0, 0]:.3f} Lambda={exact.Lambda[0, 0]:.3f}")
print(f"SLR (default):    mu_R={default.mu_R[0]:.3f} S={default.S[0, 0]:.3f}")
print(f"Taylor at mean:   mu_R={taylor.mu_R[0]:.3f} S={taylor.S[0, 0]:.3f}")
