"""Shared exception types."""


class CapacityError(ValueError):
    """A generated set or dense matrix would exceed a configured size limit."""


class ConsistencyError(RuntimeError):
    """An internal cross-check failed, e.g. a transform output that should be
    real carries a nonnegligible imaginary part."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration limit.

    The final relative residual is available as ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
