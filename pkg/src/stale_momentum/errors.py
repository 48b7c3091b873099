"""Exception types shared across the package."""


class StaleMomentumError(Exception):
    """Base class for all package errors."""


class DomainError(StaleMomentumError, ValueError):
    """A parameter is outside its mathematical domain (e.g. mu_s >= 1)."""


class DivergenceError(StaleMomentumError):
    """An iterate sequence left the finite range; carries the last finite step.

    ``last_finite_index`` is the largest t for which w_t was still finite
    and below the divergence threshold.
    """

    def __init__(self, message: str, last_finite_index: int):
        super().__init__(message)
        self.last_finite_index = last_finite_index


class UnsupportedObjectiveError(StaleMomentumError, TypeError):
    """Raised when an operation requires a quadratic objective."""
