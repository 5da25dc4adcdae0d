"""Exception hierarchy shared by all modules."""


class SplineError(Exception):
    """Base class for errors raised by ctspline."""


class DimensionError(SplineError, ValueError):
    """Array shapes do not agree."""


class DomainError(SplineError, ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalError(SplineError, ArithmeticError):
    """A numerical procedure failed (quadrature budget, cross-check, factorization)."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class ConvergenceError(SplineError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    The best iterate found so far is kept on the exception so callers can
    still inspect it.
    """

    def __init__(self, message, theta=None, gap=None):
        super().__init__(message)
        self.theta = theta
        self.gap = gap
