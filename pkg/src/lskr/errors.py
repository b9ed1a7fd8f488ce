"""Exception and warning types shared across the package."""


class LskrError(Exception):
    """Base class for all package errors."""


class InvalidInputError(LskrError):
    """Input violates a documented precondition (shape, finiteness, range)."""


class CapacityExceededError(LskrError):
    """Requested problem size exceeds a documented hard cap."""


class UnsupportedError(LskrError):
    """Operation is outside the supported configuration space."""


class EmptyCloudError(LskrError):
    """Operation requires at least one point."""


class NoNullspaceError(LskrError):
    """Fitted model has no null-space vectors at the requested tolerance."""


class NoZeroSetError(LskrError):
    """The potential function has no zero crossing in the unit cell."""


class NumericalFailureError(LskrError):
    """A numerical routine produced non-finite or unusable values."""


class IllPosedError(LskrError):
    """Problem instance admits no meaningful solution (e.g. no data, no prior)."""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped before reaching its target residual."""
