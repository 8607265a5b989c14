"""
Signal synthesis exceptions.
"""


class SynthError(Exception):
    """Base exception for signal synthesis errors."""
    pass


class ProfileValidationError(SynthError, ValueError):
    """Raised when a node profile violates its invariants."""
    pass


class EventValidationError(SynthError, ValueError):
    """Raised when an activity event violates its invariants."""
    pass


class EventNotObservableError(SynthError):
    """Raised when an event trace never enters the window frame."""
    pass


class DatasetFormatError(SynthError):
    """Raised when a DASG dataset file is malformed."""
    pass
