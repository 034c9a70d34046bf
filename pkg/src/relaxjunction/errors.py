"""Exception hierarchy shared by every module."""


class JunctionError(Exception):
    """Base class for all errors raised by relaxjunction."""

    category = "error"


class ModelError(JunctionError, ValueError):
    """Invalid model construction (shapes, geometry, non-Hermitian input)."""

    category = "model"


class DomainError(JunctionError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""

    category = "domain"


class UsageError(JunctionError):
    """An operation was called outside its stated preconditions."""

    category = "usage"


class ComputationError(JunctionError, ArithmeticError):
    """A linear-algebra step failed.

    Attributes
    ----------
    condition : float or None
        Estimated condition number of the failing matrix, if known.
    residual : float or None
        Achieved residual of the failing solve, if known.
    """

    category = "computation"

    def __init__(self, message, condition=None, residual=None):
        super().__init__(message)
        self.condition = condition
        self.residual = residual


class AccuracyError(JunctionError, ArithmeticError):
    """Quadrature did not reach the requested tolerance.

    Carries the best available estimate and the error it achieved.
    """

    category = "accuracy"

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class ConsistencyError(JunctionError):
    """Two independent estimators of the same quantity disagree."""

    category = "consistency"


class StepSizeError(JunctionError, ArithmeticError):
    """Time propagation is unstable for the requested step."""

    category = "accuracy"
