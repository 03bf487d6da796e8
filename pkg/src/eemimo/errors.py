"""Exception and warning types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class NumericError(ArithmeticError):
    """Raised when a numerical routine cannot produce a trustworthy result."""


class DomainError(NumericError):
    """Raised when a matrix argument lies outside the function's domain
    (for example a log-determinant of an indefinite matrix)."""


class ConvergenceWarning(RuntimeWarning):
    """Emitted when an iterative solver hits its iteration cap."""
