"""Exception types shared across the library."""


class PrivestError(Exception):
    """Base class for library errors."""


class InvalidParameterError(PrivestError, ValueError):
    """A numeric parameter is outside its allowed range."""


class InvalidInputError(PrivestError, ValueError):
    """Input data violates a structural requirement (shape, symmetry, universe)."""


class EmptyInputError(PrivestError, ValueError):
    """An operation received zero samples."""


class SingularMatrixError(PrivestError, ValueError):
    """A matrix that must be invertible is numerically singular."""


class TooLargeError(PrivestError, ValueError):
    """Problem size exceeds the limit of an exact (exponential) routine."""


class InsufficientSamplesError(PrivestError, ValueError):
    """Not enough samples for the requested estimator configuration."""

    def __init__(self, required: int, available: int, detail: str = ""):
        self.required = required
        self.available = available
        msg = f"need at least {required} samples, got {available}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class EstimationFailedError(PrivestError, RuntimeError):
    """A private vote came back empty mid-run; the estimate cannot proceed.

    This is an expected low-probability outcome, not a bug: the guarantees
    only hold with probability 1 - beta.
    """
