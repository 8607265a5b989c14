"""
Shared domain types for the DAS activity framework.
"""
from .profiles import ActivityKind, EventBands, NodeProfile, ActivityEvent
from .windows import PhaseWindow, LabeledSample, PhaseRecording, Track


__all__ = [
    'ActivityKind',
    'EventBands',
    'NodeProfile',
    'ActivityEvent',
    'PhaseWindow',
    'LabeledSample',
    'PhaseRecording',
    'Track'
]
