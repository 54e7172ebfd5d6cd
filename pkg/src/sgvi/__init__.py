"""Sequential Gaussian variational inference (S-GVI) for nonlinear state estimation.

The per-step posterior is the Gaussian minimizing the KL divergence to the
Bayes-filter posterior, found by natural gradient descent with sigma-point
expectations and an SLR approximation of the transition density. An
iterated-EKF MAP baseline and the exact linear information filter are
included for comparison.
"""
from .errors import (AnchorCoincidence, ConfigParse, ConfigValidation, DegenerateScaling,
                     DimensionMismatch, EstimationError, LengthMismatch, NoConvergence,
                     NonFiniteValue, NotPositiveDefinite)
from .gaussian import Dim, GaussianBelief, belief_from_canonical, belief_from_moments, sqrt_factor
from .quadrature import SigmaPointSet, UnscentedParams, expect, generate_sigma_points
from .slr import SlrResult, jacobian_linearize, marginal_predictive, slr_linearize
from .models import (LinearModel, MeasurementModel, SystemModel, TransitionModel, benchmark_1d,
                     coordinated_turn, range_measurements, range_tracking)
from .estimators import (EstimationTrace, Estimator, Linearization, SgviConfig, UpdateResult,
                         iekf_map_update, information_filter_update, linear_cost, run_sequential,
                         sgvi_update)
from .simulation import Scenario, Trial, TurnMismatch, run_monte_carlo, simulate_trial
from .metrics import nees, rmse, sigma_bound_violations

__version__ = "0.1.0"
