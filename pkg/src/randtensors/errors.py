"""Exception types shared across the package."""


class RandTensorError(Exception):
    """Base class for all errors raised by randtensors."""


class ShapeError(RandTensorError, ValueError):
    """Operand shapes or mode partitions are inconsistent."""


class ArgumentError(RandTensorError, ValueError):
    """An argument is outside the domain an operation accepts."""


class NumericalError(RandTensorError, ArithmeticError):
    """A numerical procedure could not produce a valid result."""


class NotPSDError(NumericalError):
    """A correlation-type tensor has an eigenvalue below the tolerance."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class SingularCovarianceError(NumericalError):
    """A covariance cannot be inverted; carries a condition-number estimate."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConvergenceError(NumericalError):
    """An iterative solver failed to converge or left its domain."""


class DegenerateIterateError(NumericalError):
    """A power-iteration contraction vanished, so it cannot be normalized."""


class DomainError(RandTensorError, ValueError):
    """A real-branch formula was evaluated outside its domain."""
