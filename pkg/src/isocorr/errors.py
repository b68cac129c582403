"""Exception types shared across the package."""


class IsocorrError(Exception):
    """Base class for all package errors."""


class ValidationError(IsocorrError):
    """Malformed or inconsistent input data."""


class InfeasibleCorrelationError(IsocorrError):
    """Common correlation outside the range admissible for the dimension."""


class SingularMatrixError(IsocorrError):
    """Correlation matrix is singular (or within epsilon of a singular root)."""


class DimensionMismatchError(IsocorrError):
    """Vector or matrix dimensions do not agree."""


class DegenerateVarianceError(IsocorrError):
    """Portfolio variance too close to zero for a meaningful decomposition."""


class UndefinedCorrelationError(IsocorrError):
    """Correlation undefined because an input series has zero variance."""


class InfiniteTransformError(IsocorrError):
    """Fisher transform diverges for |r| >= 1."""


class InsufficientObservationsError(IsocorrError):
    """Too few observations for the requested statistic."""
