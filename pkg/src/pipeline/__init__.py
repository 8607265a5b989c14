"""
Preprocessing pipeline: synchronization, windowing, cleaning, splitting and
dataset access auditing.
"""
from .preprocessing import (
    AlignedTrack,
    ExtractionResult,
    Validity,
    clean,
    default_threshold,
    extract_samples,
    synchronize,
    validity,
    window_sample
)
from .splitting import (
    DatasetSplit,
    apply_split_manifest,
    read_split_manifest,
    split,
    train_count,
    write_split_manifest
)
from .audit import AccessAudit, AuditedDataset
from .exceptions import (
    PipelineError,
    SynchronizationGapError,
    WindowOutOfBoundsError,
    TooFewSamplesError,
    LeakageError
)


__all__ = [
    'AlignedTrack',
    'ExtractionResult',
    'Validity',
    'clean',
    'default_threshold',
    'extract_samples',
    'synchronize',
    'validity',
    'window_sample',
    'DatasetSplit',
    'apply_split_manifest',
    'read_split_manifest',
    'split',
    'train_count',
    'write_split_manifest',
    'AccessAudit',
    'AuditedDataset',
    'PipelineError',
    'SynchronizationGapError',
    'WindowOutOfBoundsError',
    'TooFewSamplesError',
    'LeakageError'
]
