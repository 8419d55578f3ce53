"""Exception types shared across the package."""


class BandvoteError(Exception):
    """Base class for all package errors."""


class DimensionError(BandvoteError, ValueError):
    """Matrix or vector dimensions do not match the operation."""


class SymmetryError(BandvoteError, ValueError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class SingularMatrixError(BandvoteError, ValueError):
    """A linear system is numerically singular."""


class NotPsdError(BandvoteError, ValueError):
    """A matrix required to be positive semidefinite has a negative eigenvalue."""


class ParameterError(BandvoteError, ValueError):
    """An argument is outside its admissible range."""


class InsufficientDataError(BandvoteError, ValueError):
    """Not enough samples/columns for the requested operation."""


class BlockingError(BandvoteError, ValueError):
    """A spectrum cannot be split into blocks of the requested width."""


class ShapeError(BandvoteError, ValueError):
    """Array shapes are inconsistent."""


class FeasibilityError(BandvoteError, ValueError):
    """A starting point violates the problem constraints."""


class ConvergenceError(BandvoteError, RuntimeError):
    """An iterative solver hit its iteration cap.

    Carries the best iterate found so far in ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateDataError(BandvoteError, ValueError):
    """Training data is degenerate (e.g. a single class present)."""
