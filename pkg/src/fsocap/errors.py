"""Exception hierarchy shared across the package."""


class FsoCapError(Exception):
    """Base class for all library errors."""


class DomainError(FsoCapError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ConfigurationError(FsoCapError, ValueError):
    """Inputs are individually valid but cannot be combined (e.g. overlapping pole families)."""


class ComputationError(FsoCapError, ArithmeticError):
    """Overflow or loss of meaning inside a numerical evaluation."""


class ConvergenceError(FsoCapError, ArithmeticError):
    """Iterative evaluation did not settle.

    ``estimates`` holds the last iterates so callers can decide whether the
    partial answer is usable.
    """

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class FitError(ConvergenceError):
    """Moment-matching solver failed; ``best`` is the best iterate seen."""

    def __init__(self, message, best=None, estimates=()):
        super().__init__(message, estimates)
        self.best = best


class QuadratureError(ConvergenceError):
    """Adaptive quadrature could not meet its tolerance; ``partial`` is the value reached."""

    def __init__(self, message, partial=None, estimates=()):
        super().__init__(message, estimates)
        self.partial = partial
