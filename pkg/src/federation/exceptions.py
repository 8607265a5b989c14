"""
Federation-related exceptions.
"""


class FederationError(Exception):
    """Base exception for federated training errors."""
    pass


class FederationConfigError(FederationError, ValueError):
    """Raised when a federation is configured inconsistently."""
    pass


class NodeConstraintError(FederationError):
    """Raised when a node does not hold enough local samples."""
    pass
