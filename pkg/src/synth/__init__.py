"""
Synthetic DAS signal generation and DASG dataset storage.
"""
from .generator import (
    DEFAULT_WINDOW_SHAPE,
    EventOrigin,
    EventTrace,
    SyntheticRecording,
    draw_event,
    nearest_index,
    synthesize_dataset,
    synthesize_event,
    synthesize_event_traced,
    synthesize_recording,
    validate_event,
    validate_profile
)
from .profiles import fast_profiles, profiles_by_id, reference_profiles, relative_deviation
from .spectral import dominant_frequency
from .dataset_io import StoredDataset, decode_dataset, encode_dataset, read_dataset, write_dataset
from .exceptions import (
    SynthError,
    ProfileValidationError,
    EventValidationError,
    EventNotObservableError,
    DatasetFormatError
)


__all__ = [
    'DEFAULT_WINDOW_SHAPE',
    'EventOrigin',
    'EventTrace',
    'SyntheticRecording',
    'draw_event',
    'nearest_index',
    'synthesize_dataset',
    'synthesize_event',
    'synthesize_event_traced',
    'synthesize_recording',
    'validate_event',
    'validate_profile',
    'fast_profiles',
    'profiles_by_id',
    'reference_profiles',
    'relative_deviation',
    'dominant_frequency',
    'StoredDataset',
    'decode_dataset',
    'encode_dataset',
    'read_dataset',
    'write_dataset',
    'SynthError',
    'ProfileValidationError',
    'EventValidationError',
    'EventNotObservableError',
    'DatasetFormatError'
]
