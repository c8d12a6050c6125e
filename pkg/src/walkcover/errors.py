"""Exception types shared across the package."""


class WalkcoverError(Exception):
    """Base class for all package-specific errors."""


class StepBudgetExceeded(WalkcoverError):
    """A bounded walk ran out of steps before the awaited event occurred."""

    def __init__(self, message: str, steps_taken: int):
        super().__init__(message)
        self.steps_taken = steps_taken


class InvalidThresholdError(WalkcoverError):
    """A visit-count threshold k exceeds what saturating counters can certify."""


class SaturationError(WalkcoverError):
    """An operation needs exact counts that saturation has destroyed."""


class SnapshotFormatError(WalkcoverError):
    """An occupancy snapshot is truncated, corrupt, or from an unknown version."""


class DivergentTransformError(WalkcoverError):
    """The requested Laplace-transform parameter lies outside the convergence region."""


class IncompleteTraceError(WalkcoverError):
    """An excursion trace ended before the stop rule fired, so the verdict is undefined."""


class InsufficientPathError(WalkcoverError):
    """A stored path is too short to contain the requested number of excursions."""


class InsufficientDataError(WalkcoverError):
    """An estimator was given too few checkpoints or replicas to be meaningful."""


class MalformedFileError(WalkcoverError):
    """A results file does not match the documented CSV schema."""
