"""
SR-Net binary activity classifier implemented directly on numpy.
"""
from .architecture import ArchitectureConfig, PRESETS, desk_preset, full_preset, parse_descriptor
from .params import ModelParams, init_params
from .network import (
    ForwardCache,
    Score,
    backward,
    backward_batch,
    bce_with_logits,
    forward,
    forward_batch,
    loss,
    predict,
    score,
    stack_windows
)
from .optimizer import Adam, GradientDescent
from .training import EpochRecord, FitResult, TrainConfig, fit, train_local
from .checkpoint import (
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    params_digest,
    save_checkpoint
)
from .exceptions import (
    SRNetError,
    ArchitectureError,
    ShapeMismatchError,
    DescriptorMismatchError,
    EmptyDatasetError,
    CheckpointFormatError
)


__all__ = [
    'ArchitectureConfig',
    'PRESETS',
    'desk_preset',
    'full_preset',
    'parse_descriptor',
    'ModelParams',
    'init_params',
    'ForwardCache',
    'Score',
    'backward',
    'backward_batch',
    'bce_with_logits',
    'forward',
    'forward_batch',
    'loss',
    'predict',
    'score',
    'stack_windows',
    'Adam',
    'GradientDescent',
    'EpochRecord',
    'FitResult',
    'TrainConfig',
    'fit',
    'train_local',
    'decode_checkpoint',
    'encode_checkpoint',
    'load_checkpoint',
    'params_digest',
    'save_checkpoint',
    'SRNetError',
    'ArchitectureError',
    'ShapeMismatchError',
    'DescriptorMismatchError',
    'EmptyDatasetError',
    'CheckpointFormatError'
]
