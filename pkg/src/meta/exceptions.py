"""
Meta-learning exceptions.
"""


class MetaLearningError(Exception):
    """Base exception for meta-learning errors."""
    pass


class InsufficientDataError(MetaLearningError):
    """Raised when a source dataset cannot supply a stratified task."""
    pass


class ShotBudgetError(MetaLearningError, ValueError):
    """Raised when more shots are requested than support samples exist."""
    pass
