"""Exception types shared across the package.

The CLI maps :class:`DomainError` to exit code 2 and
:class:`ConvergenceError` to exit code 3.
"""


class PTLabError(Exception):
    """Base class for all package errors."""


class DomainError(PTLabError, ValueError):
    """A parameter lies outside the region where an operation is defined."""


class ConvergenceError(PTLabError, RuntimeError):
    """An iterative method failed to converge.

    ``last`` carries the final iterate when one exists.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class IntegrationError(PTLabError, ArithmeticError):
    """Overflow or step underflow while integrating an ODE."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position
