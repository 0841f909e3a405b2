"""Exception types shared across the package."""


class DomainError(ValueError):
    """Inputs lie outside the mathematical domain of an operation."""


class BracketError(ValueError):
    """A root bracket does not enclose a sign change."""


class ConvergenceError(RuntimeError):
    """An iterative eigensolver failed to reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CapacityError(RuntimeError):
    """A Hilbert-space dimension limit was exceeded before convergence."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
