"""
SR-Net model exceptions.
"""


class SRNetError(Exception):
    """Base exception for model errors."""
    pass


class ArchitectureError(SRNetError, ValueError):
    """Raised when an architecture is inconsistent or cannot be parsed."""
    pass


class ShapeMismatchError(SRNetError, ValueError):
    """Raised when an input does not match the architecture's input shape."""
    pass


class DescriptorMismatchError(SRNetError):
    """Raised when parameter sets with different architectures are combined."""
    pass


class EmptyDatasetError(SRNetError):
    """Raised when training or scoring is requested on no samples."""
    pass


class CheckpointFormatError(SRNetError):
    """Raised when a checkpoint cannot be decoded."""
    pass
