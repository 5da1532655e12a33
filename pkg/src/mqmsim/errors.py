"""Exception types shared across the package."""


class MqmsimError(Exception):
    """Base class for all package errors."""


class BudgetError(MqmsimError, ValueError):
    """A noise budget violates a physical-parameter invariant."""


class InvalidCovarianceError(MqmsimError, ValueError):
    """A covariance matrix is not symmetric positive (semi)definite."""


class DegenerateStateError(MqmsimError, ValueError):
    """A Gaussian state has a singular covariance matrix."""


class FilterGridError(MqmsimError, ValueError):
    """A verification-filter grid is too short or too coarse.

    Carries ``truncation_estimate``, the envelope value at the end of the
    grid relative to the filter peak.
    """

    def __init__(self, message, truncation_estimate=None):
        super().__init__(message)
        self.truncation_estimate = truncation_estimate


class FactorizationError(MqmsimError, ValueError):
    """A spectrum cannot be factorized into half-plane analytic parts."""


class RealAxisPoleError(FactorizationError):
    """A rational function has a pole on the real frequency axis."""


class CausalityError(MqmsimError, ValueError):
    """A transform that must be causal has an upper-half-plane pole."""


class ResolutionError(MqmsimError, ValueError):
    """A phase-space grid is too coarse for the requested smoothing kernel."""


class NumericalError(MqmsimError, RuntimeError):
    """An iterative or algebraic solve failed.

    Carries ``residual`` where a meaningful residual is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(MqmsimError, ValueError):
    """A scenario configuration failed validation."""
