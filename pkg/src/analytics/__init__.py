"""
Analytics module: metric rows and stage timings shared by training runs.
"""

from .metrics import (
    AGGREGATION_EVENT,
    EPOCH_EVENT,
    METRIC_COLUMNS,
    MetricRow,
    MetricsCollector
)
from .exceptions import AnalyticsException, InvalidAccuracyError, MetricsError, UnknownEventError

__all__ = [
    'AGGREGATION_EVENT',
    'EPOCH_EVENT',
    'METRIC_COLUMNS',
    'MetricRow',
    'MetricsCollector',
    'AnalyticsException',
    'InvalidAccuracyError',
    'MetricsError',
    'UnknownEventError'
]
