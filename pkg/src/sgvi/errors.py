"""Exception types raised across the package."""


class EstimationError(Exception):
    """Base class for all errors raised by :mod:`sgvi`."""


class NotPositiveDefinite(EstimationError, ValueError):
    """A matrix that must be symmetric positive definite is not."""


class DimensionMismatch(EstimationError, ValueError):
    pass


class NonFiniteValue(EstimationError, FloatingPointError):
    """A model function or update produced NaN or Inf."""


class DegenerateScaling(EstimationError, ValueError):
    """Unscented scaling with ``n_x + lambda <= 0``."""


class AnchorCoincidence(EstimationError, ValueError):
    """Range Jacobian requested at (or numerically at) an anchor position."""


class LengthMismatch(EstimationError, ValueError):
    pass


class NoConvergence(EstimationError):
    """Iteration budget exhausted. Estimators return a result flagged
    ``converged=False`` instead of raising; this type is used for status
    reporting."""


class ConfigError(EstimationError):
    pass


class ConfigParse(ConfigError):
    pass


class ConfigValidation(ConfigError):
    pass
