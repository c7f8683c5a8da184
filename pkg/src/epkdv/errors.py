"""Exception hierarchy shared by all modules."""


class EpKdvError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(EpKdvError, ValueError):
    """Invalid physical parameter or grid definition."""


class ShapeError(EpKdvError, ValueError):
    """Grid, truncation-order or trajectory mismatch."""


class NumericError(EpKdvError, ArithmeticError):
    """An operation produced non-finite values."""


class IntegrabilityError(NumericError):
    """Antiderivative requested for an integrand with non-zero mean."""


class PreconditionError(EpKdvError, ValueError):
    """An operation was called outside its documented domain."""


class HierarchyError(EpKdvError):
    """The profile hierarchy cannot be evaluated (missing data or time range)."""


class EllipticError(NumericError):
    """The nonlinear Poisson solve failed to converge."""


class DomainError(NumericError):
    """Density or symbol argument left the admissible (positive) domain."""


class IntegrationError(NumericError):
    """Time integration failed (blow-up, positivity loss, CFL violation)."""


class ConfigError(EpKdvError, ValueError):
    """Malformed experiment configuration."""
