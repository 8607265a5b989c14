"""
Exceptions raised while collecting run metrics.
"""


class AnalyticsException(Exception):
    """Base exception for metric collection."""
    pass


class MetricsError(AnalyticsException):
    """Raised when a metric row cannot be recorded."""
    pass


class InvalidAccuracyError(MetricsError):
    """Accuracy outside [0, 1]."""

    def __init__(self, accuracy):
        super().__init__(f"Accuracy must be in [0, 1], got {accuracy}")
        self.accuracy = accuracy


class UnknownEventError(MetricsError):
    """Event tag other than a local epoch or an aggregation."""

    def __init__(self, event):
        super().__init__(f"Unknown event type {event!r}")
        self.event = event
