"""Exception types raised across the package."""


class N2SError(Exception):
    """Base class for all package errors."""


class DomainError(N2SError, ValueError):
    """A query falls outside the region where a quantity is defined."""


class NormalizationError(N2SError, ValueError):
    """A state that must be normalized is not."""


class GridError(N2SError, ValueError):
    """A grid is too small or malformed for the requested operation."""


class SolverError(N2SError, RuntimeError):
    """An iterative solver failed to converge."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PreconditionError(N2SError, ValueError):
    """Inputs violate a documented precondition."""
