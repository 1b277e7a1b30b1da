"""Exception hierarchy.

Input problems derive from :class:`ValueError`, numerical failures from
:class:`ArithmeticError`, so callers (and the CLI) can map them to exit
codes without knowing every subclass.
"""


class DunklError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DunklError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class CapacityError(DunklError, ValueError):
    """Index beyond the cached range of a moment sequence."""


class ConvergenceError(DunklError, ArithmeticError):
    """A series or iteration did not converge within its budget."""


class DefectiveExtractionError(DunklError, ArithmeticError):
    """Jordan chains could not be extracted reliably."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BoundaryDegeneracyError(DunklError, ArithmeticError):
    """Winding number along a box boundary could not be stabilised."""


class DegeneracyError(DunklError, ValueError):
    """Repeated roots where distinct ones are required."""


class QuadratureError(DunklError, ArithmeticError):
    """Quadrature refinement failed to reach the requested accuracy."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
