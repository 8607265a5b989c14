"""
Preprocessing-related exceptions.
"""


class PipelineError(Exception):
    """Base exception for preprocessing errors."""
    pass


class SynchronizationGapError(PipelineError):
    """Raised when a track timestamp falls outside the recording span."""
    pass


class WindowOutOfBoundsError(PipelineError):
    """Raised when a requested window does not fit inside the recording."""
    pass


class TooFewSamplesError(PipelineError):
    """Raised when a dataset is too small to split."""
    pass


class LeakageError(PipelineError):
    """Raised when a protected dataset was read during a training phase."""
    pass
