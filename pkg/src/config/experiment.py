"""
Experiment files: one JSON document whose optional sections override the
environment preset.

Sections: synth, pipeline, model, train, federation, meta, harness. Unknown
keys anywhere are rejected. The canonical JSON dump of the effective settings
is hashed into the config digest recorded beside every run output.
"""
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from marshmallow import RAISE, Schema, ValidationError, fields, validate

from src.federation import FederationConfig
from src.meta import MetaConfig
from src.srnet import PRESETS, ArchitectureConfig, TrainConfig
from .base import Config


logger = logging.getLogger(__name__)


NODE_IDS = ('red', 'ca', 'cb')
PROFILE_SETS = ('reference', 'fast')
SAMPLE_SOURCES = ('windows', 'recordings')
HARNESS_EXECUTION_FIELDS = ('workers', 'run_dir')


class ExperimentFileError(ValueError):
    """Raised when an experiment file cannot be read or fails validation"""

    def __init__(self, message, messages=None):
        super().__init__(message)
        self.messages = messages or {}


class _StrictSchema(Schema):
    class Meta:
        unknown = RAISE


def _node_map(values):
    return fields.Dict(
        keys=fields.String(validate=validate.OneOf(NODE_IDS)),
        values=values
    )


class SynthSchema(_StrictSchema):
    dataset_sizes = _node_map(fields.Integer(validate=validate.Range(min=2)))
    window_shape = fields.List(fields.Integer(validate=validate.Range(min=1)), validate=validate.Length(equal=2))
    profile_set = fields.String(validate=validate.OneOf(PROFILE_SETS))
    class_balance = fields.Float(validate=validate.Range(min=0, max=1, min_inclusive=False, max_inclusive=False))


class PipelineSchema(_StrictSchema):
    split_ratios = _node_map(fields.Float(validate=validate.Range(min=0, max=1, min_inclusive=False,
                                                                  max_inclusive=False)))
    stratified = fields.Boolean()
    source = fields.String(validate=validate.OneOf(SAMPLE_SOURCES))
    threshold_multiple = fields.Float(validate=validate.Range(min=0))


class ModelSchema(_StrictSchema):
    preset = fields.String(validate=validate.OneOf(sorted(PRESETS)))


class TrainSchema(_StrictSchema):
    learning_rate = fields.Float(validate=validate.Range(min=0))
    beta1 = fields.Float(validate=validate.Range(min=0, max=1, max_inclusive=False))
    beta2 = fields.Float(validate=validate.Range(min=0, max=1, max_inclusive=False))
    epsilon = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    batch_size = fields.Integer(validate=validate.Range(min=1))
    epochs = fields.Integer(validate=validate.Range(min=0))


class FederationSchema(_StrictSchema):
    rounds = fields.Integer(validate=validate.Range(min=1))
    local_epochs = fields.Integer(validate=validate.Range(min=1))
    workers = fields.Integer(validate=validate.Range(min=1))


class MetaSchema(_StrictSchema):
    inner_steps = fields.Integer(validate=validate.Range(min=1))
    inner_learning_rate = fields.Float(validate=validate.Range(min=0))
    meta_step = fields.Float(validate=validate.Range(min=0, max=1, min_inclusive=False))
    iterations = fields.Integer(validate=validate.Range(min=0))
    support_size = fields.Integer(validate=validate.Range(min=2))
    query_size = fields.Integer(validate=validate.Range(min=0))
    finetune_lr = fields.Float(validate=validate.Range(min=0))
    shot_budget = fields.Integer(validate=validate.Range(min=1))


class HarnessSchema(_StrictSchema):
    seeds = fields.List(fields.Integer(), validate=validate.Length(min=1))
    workers = fields.Integer(validate=validate.Range(min=1))
    run_dir = fields.String(validate=validate.Length(min=1))
    shots = fields.Integer(validate=validate.Range(min=1))
    sweep_seeds = fields.Integer(validate=validate.Range(min=1))


class ExperimentSchema(_StrictSchema):
    synth = fields.Nested(SynthSchema)
    pipeline = fields.Nested(PipelineSchema)
    model = fields.Nested(ModelSchema)
    train = fields.Nested(TrainSchema)
    federation = fields.Nested(FederationSchema)
    meta = fields.Nested(MetaSchema)
    harness = fields.Nested(HarnessSchema)


@dataclass(frozen=True)
class SynthSettings:
    dataset_sizes: Dict[str, int]
    window_shape: Tuple[int, int]
    profile_set: str = 'reference'
    class_balance: float = 0.5


@dataclass(frozen=True)
class PipelineSettings:
    """
    Attributes:
        split_ratios: Train fraction per node
        stratified: Stratify splits by label
        source: 'windows' renders windows directly; 'recordings' renders a
            continuous recording per node and runs synchronization, window
            sampling and cleaning on it
        threshold_multiple: Cleaning threshold in units of the node's noise std
    """
    split_ratios: Dict[str, float]
    stratified: bool = True
    source: str = 'windows'
    threshold_multiple: float = 3.0


@dataclass(frozen=True)
class HarnessSettings:
    seeds: Tuple[int, ...]
    workers: int = 1
    run_dir: str = 'runs'
    shots: int = 5
    sweep_seeds: int = 5


@dataclass(frozen=True)
class ExperimentSettings:
    """Effective configuration of every module for one experiment."""
    env: str
    synth: SynthSettings
    pipeline: PipelineSettings
    model_preset: str
    train: TrainConfig
    federation: FederationConfig
    meta: MetaConfig
    harness: HarnessSettings
    source_path: Optional[str] = field(default=None, compare=False)

    @property
    def arch(self) -> ArchitectureConfig:
        return PRESETS[self.model_preset](tuple(self.synth.window_shape))

    def to_dict(self, include_execution: bool = True) -> Dict[str, Any]:
        """
        JSON-serializable view of the settings (the source path is left out).

        Args:
            include_execution: Keep worker counts and the run directory, which
                change how a run executes but not what it computes
        """
        federation = asdict(self.federation)
        harness = asdict(self.harness)
        federation_keys = ('rounds', 'local_epochs', 'workers')
        if not include_execution:
            federation_keys = federation_keys[:2]
            for key in HARNESS_EXECUTION_FIELDS:
                harness.pop(key)
        return {
            'env': self.env,
            'synth': asdict(self.synth),
            'pipeline': asdict(self.pipeline),
            'model': {'preset': self.model_preset, 'descriptor': self.arch.describe()},
            'train': self.train.to_dict(),
            'federation': {key: federation[key] for key in federation_keys},
            'meta': self.meta.to_dict(),
            'harness': harness,
        }

    def canonical_json(self) -> str:
        """Compact sorted JSON of everything that affects results; the digest input."""
        return json.dumps(self.to_dict(include_execution=False), sort_keys=True, separators=(',', ':'))

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode('utf-8')).hexdigest()

    def with_seeds(self, seeds) -> 'ExperimentSettings':
        return replace(self, harness=replace(self.harness, seeds=tuple(int(s) for s in seeds)))


def default_settings(config: Config) -> ExperimentSettings:
    """Settings of the environment preset before any experiment file is applied."""
    return ExperimentSettings(
        env=config.ENV,
        synth=SynthSettings(
            dataset_sizes=dict(config.DATASET_SIZES),
            window_shape=tuple(config.WINDOW_SHAPE),
            profile_set=config.PROFILE_SET
        ),
        pipeline=PipelineSettings(split_ratios=dict(config.SPLIT_RATIOS)),
        model_preset='desk',
        train=TrainConfig(),
        federation=FederationConfig(workers=config.WORKERS),
        meta=MetaConfig(),
        harness=HarnessSettings(seeds=tuple(config.SEEDS), workers=config.WORKERS, run_dir=str(config.RUN_DIR))
    )


def _merged(base: Mapping[str, Any], override: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in (override or {}).items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged


def apply_overrides(settings: ExperimentSettings, document: Mapping[str, Any],
                    source_path: Optional[str] = None) -> ExperimentSettings:
    """
    Validate an experiment document and apply it on top of `settings`.

    Raises:
        ExperimentFileError: If the document fails validation
    """
    try:
        data = ExperimentSchema().load(document)
    except ValidationError as e:
        raise ExperimentFileError(f"Invalid experiment file: {e.messages}", e.messages)

    synth = settings.synth
    if 'synth' in data:
        values = _merged(asdict(synth), data['synth'])
        values['window_shape'] = tuple(values['window_shape'])
        synth = SynthSettings(**values)

    pipeline = settings.pipeline
    if 'pipeline' in data:
        pipeline = PipelineSettings(**_merged(asdict(pipeline), data['pipeline']))

    if set(synth.dataset_sizes) != set(pipeline.split_ratios):
        raise ExperimentFileError(
            f"Nodes with sizes {sorted(synth.dataset_sizes)} and split ratios {sorted(pipeline.split_ratios)} differ"
        )

    train = replace(settings.train, **data.get('train', {}))
    federation = replace(settings.federation, **data.get('federation', {}))

    meta_values = dict(data.get('meta', {}))
    inner = settings.meta.inner
    if 'inner_learning_rate' in meta_values:
        inner = replace(inner, learning_rate=meta_values.pop('inner_learning_rate'))
    meta = replace(settings.meta, inner=inner, **meta_values)

    harness = settings.harness
    if 'harness' in data:
        values = _merged(asdict(harness), data['harness'])
        values['seeds'] = tuple(values['seeds'])
        harness = HarnessSettings(**values)
    if harness.shots > meta.shot_budget:
        raise ExperimentFileError(f"harness.shots={harness.shots} exceeds meta.shot_budget={meta.shot_budget}")

    return ExperimentSettings(
        env=settings.env,
        synth=synth,
        pipeline=pipeline,
        model_preset=data.get('model', {}).get('preset', settings.model_preset),
        train=train,
        federation=federation,
        meta=meta,
        harness=harness,
        source_path=source_path
    )


def load_experiment(path: Optional[Union[str, Path]], config: Config) -> ExperimentSettings:
    """
    Build the effective settings from the environment preset and an optional JSON file.

    Raises:
        ExperimentFileError: If the file is missing, not JSON, or fails validation
    """
    settings = default_settings(config)
    if path is None:
        return settings
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise ExperimentFileError(f"Experiment file not found: {path}")
    except json.JSONDecodeError as e:
        raise ExperimentFileError(f"Experiment file {path} is not valid JSON: {e}")
    if not isinstance(document, dict):
        raise ExperimentFileError(f"Experiment file {path} must hold a JSON object")
    settings = apply_overrides(settings, document, str(path))
    logger.info(f"Loaded experiment {path} (digest {settings.digest[:12]})")
    return settings
