"""Custom exception classes for mukai-fixed."""


class MukaiFixedError(Exception):
    """Base exception class for all mukai-fixed errors."""

    pass


class ValidationError(MukaiFixedError):
    """Raised when input validation fails."""

    pass


class ProblemFileError(ValidationError):
    """Raised when a problem file is malformed or has dangling references."""

    pass


class LatticeError(MukaiFixedError):
    """Raised for degenerate lattices, zero vectors and cross-ambient misuse."""

    pass


class GroupActionError(MukaiFixedError):
    """Raised when a matrix is not an isometry or a group is not finite."""

    pass


class SeriesError(MukaiFixedError):
    """Raised when a q-series operation is not defined."""

    pass


class EnumerationError(MukaiFixedError):
    """Raised when a fiber cannot be enumerated exactly."""

    pass


class StabilityError(MukaiFixedError):
    """Raised when a central charge fails a precondition."""

    pass


class VerificationError(MukaiFixedError):
    """Raised when a verification check or a task expectation fails."""

    pass
