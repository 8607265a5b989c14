"""
Reptile meta-learning and few-shot local fine-tuning.
"""
from .reptile import (
    MetaConfig,
    MetaState,
    Task,
    TaskRecord,
    inner_adapt,
    meta_train,
    meta_update,
    sample_task
)
from .finetune import (
    SweepPoint,
    evaluate,
    few_shot_sweep,
    fine_tune,
    shot_order,
    sweep_frame,
    write_sweep_csv
)
from .checkpoint import load_meta_checkpoint, save_meta_checkpoint, sidecar_path
from .exceptions import MetaLearningError, InsufficientDataError, ShotBudgetError


__all__ = [
    'MetaConfig',
    'MetaState',
    'Task',
    'TaskRecord',
    'inner_adapt',
    'meta_train',
    'meta_update',
    'sample_task',
    'SweepPoint',
    'evaluate',
    'few_shot_sweep',
    'fine_tune',
    'shot_order',
    'sweep_frame',
    'write_sweep_csv',
    'load_meta_checkpoint',
    'save_meta_checkpoint',
    'sidecar_path',
    'MetaLearningError',
    'InsufficientDataError',
    'ShotBudgetError'
]
