"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Sample vector and measure have different lengths."""


class ZeroResidual(ArithmeticError):
    """The function has zero norm, so no norming functional exists.

    Greedy drivers catch this and treat it as exact termination.
    """


class ConvergenceError(RuntimeError):
    """An iterative solver stopped above its tolerance.

    The last iterate is kept on ``coefficients`` and ``residual`` so callers can
    still inspect or use it.
    """

    def __init__(self, message, coefficients=None, residual=None, trace=None):
        super().__init__(message)
        self.coefficients = coefficients
        self.residual = residual
        self.trace = trace


class CapExceeded(ValueError):
    """A brute-force enumeration would exceed the configured cap."""

    def __init__(self, required, cap):
        super().__init__(f"enumeration needs {required} supports, cap is {cap}")
        self.required = required
        self.cap = cap


class ParameterError(ValueError):
    """Invalid parameter combination (e.g. u > N, p=1 for a q*-based budget)."""


class PreconditionError(ValueError):
    """Input does not satisfy an operation's precondition."""
