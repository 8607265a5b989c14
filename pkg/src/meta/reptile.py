"""
Reptile meta-training.

Every iteration samples one task (a stratified support/query pair) from a
source dataset, adapts the current meta model to the support set with k full
batch Adam steps and moves the meta model a fraction epsilon of the way
towards the adapted parameters. Tasks drawn from a single source dataset
differ only by the resampled support and query sets.
"""
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.models import LabeledSample
from src.srnet import ArchitectureConfig, ModelParams, TrainConfig, fit, init_params, score
from .exceptions import InsufficientDataError


logger = logging.getLogger(__name__)


LOG_EVERY = 50


@dataclass(frozen=True)
class MetaConfig:
    """
    Reptile hyperparameters.

    Attributes:
        inner_steps: Adam steps k per task
        inner: Inner optimizer settings (learning rate and moment decays)
        meta_step: Interpolation step epsilon in (0, 1]
        iterations: Meta iterations (one task each)
        support_size: Support samples per task
        query_size: Query samples per task
        finetune_lr: Gradient-descent rate alpha of local fine-tuning
        shot_budget: Largest number of fine-tuning shots
    """
    inner_steps: int = 32
    inner: TrainConfig = field(default_factory=TrainConfig)
    meta_step: float = 0.1
    iterations: int = 400
    support_size: int = 10
    query_size: int = 10
    finetune_lr: float = 1e-3
    shot_budget: int = 10

    def __post_init__(self):
        if self.inner_steps < 1:
            raise ValueError(f"inner_steps must be >= 1, got {self.inner_steps}")
        if not 0 < self.meta_step <= 1:
            raise ValueError(f"meta_step must be in (0, 1], got {self.meta_step}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.support_size < 2 or self.query_size < 0:
            raise ValueError("support_size must be >= 2 and query_size >= 0")
        if self.finetune_lr < 0:
            raise ValueError(f"finetune_lr must be >= 0, got {self.finetune_lr}")
        if self.shot_budget < 1:
            raise ValueError(f"shot_budget must be >= 1, got {self.shot_budget}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TaskRecord:
    iteration: int
    task_seed: int
    source: int
    inner_loss: float
    query_accuracy: Optional[float] = None


@dataclass(eq=False)
class MetaState:
    """Meta model, iteration counter and the history of sampled tasks."""
    meta_params: ModelParams
    iteration: int = 0
    history: List[TaskRecord] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class Task:
    support: List[LabeledSample]
    query: List[LabeledSample]
    support_indices: Tuple[int, ...]
    query_indices: Tuple[int, ...]


def _quotas(counts: np.ndarray, size: int, lower: int) -> np.ndarray:
    """Proportional class quotas summing to `size`, each at least `lower`."""
    share = counts / counts.sum() * size
    quotas = np.maximum(np.floor(share + 0.5).astype(int), lower)
    while quotas.sum() > size:
        quotas[int(np.argmax(quotas - lower))] -= 1
    while quotas.sum() < size:
        quotas[int(np.argmax(counts - quotas))] += 1
    return quotas


def sample_task(dataset: Sequence[LabeledSample], config: MetaConfig, rng: np.random.Generator,
                labels: Optional[np.ndarray] = None) -> Task:
    """
    Draw disjoint stratified support and query sets.

    The support set always holds both labels.

    Args:
        dataset: Source samples
        config: Supplies support and query sizes
        rng: Random stream
        labels: Precomputed labels of `dataset` (read from it otherwise)

    Raises:
        InsufficientDataError: If a class cannot cover its support and query quota
    """
    if labels is None:
        labels = np.array([dataset[i].label for i in range(len(dataset))])
    classes = np.array([0, 1])
    counts = np.array([int(np.sum(labels == c)) for c in classes])
    if np.any(counts == 0):
        raise InsufficientDataError("Source dataset must contain both labels")

    support_quota = _quotas(counts, config.support_size, 1)
    query_quota = _quotas(counts, config.query_size, 0) if config.query_size else np.zeros(2, dtype=int)
    if np.any(support_quota + query_quota > counts):
        raise InsufficientDataError(
            f"Need {support_quota + query_quota} samples per class, source has {counts}"
        )

    support_indices: List[int] = []
    query_indices: List[int] = []
    for c, n_support, n_query in zip(classes, support_quota, query_quota):
        members = rng.permutation(np.flatnonzero(labels == c))
        support_indices.extend(int(i) for i in members[:n_support])
        query_indices.extend(int(i) for i in members[n_support:n_support + n_query])
    support_indices = [support_indices[i] for i in rng.permutation(len(support_indices))]
    query_indices = [query_indices[i] for i in rng.permutation(len(query_indices))]

    return Task(
        support=[dataset[i] for i in support_indices],
        query=[dataset[i] for i in query_indices],
        support_indices=tuple(support_indices),
        query_indices=tuple(query_indices)
    )


def _inner_config(config: MetaConfig, support_size: int) -> TrainConfig:
    return replace(config.inner, batch_size=support_size, epochs=config.inner_steps, shuffle=False)


def inner_adapt(params: ModelParams, support: Sequence[LabeledSample], config: MetaConfig) -> ModelParams:
    """Exactly k full-batch Adam steps on the support set, starting from a fresh optimizer."""
    return fit(params, support, _inner_config(config, len(support))).params


def meta_update(previous: ModelParams, adapted: ModelParams, step: float) -> ModelParams:
    """
    Move `previous` a fraction `step` of the way towards `adapted`.

    The result lies element-wise between the two inputs; step 0 and step 1
    return exact copies of the respective endpoints.
    """
    previous.require_compatible(adapted)
    if not 0 <= step <= 1:
        raise ValueError(f"step must be in [0, 1], got {step}")
    if step == 0:
        return previous.copy()
    if step == 1:
        return adapted.copy()
    start = previous.flatten()
    end = adapted.flatten()
    moved = start + step * (end - start)
    moved = np.clip(moved, np.minimum(start, end), np.maximum(start, end))
    return ModelParams.from_vector(previous.arch, moved)


def meta_train(source: Sequence[LabeledSample], arch: ArchitectureConfig, config: MetaConfig, seed: int,
               extra_sources: Sequence[Sequence[LabeledSample]] = (), track_query: bool = True,
               initial: Optional[ModelParams] = None) -> MetaState:
    """
    Run serial Reptile for `config.iterations` tasks.

    Args:
        source: Main source dataset
        arch: Architecture of the meta model
        config: Reptile hyperparameters
        seed: Seeds the initialization and every task draw
        extra_sources: Further source datasets; each iteration picks one source uniformly
        track_query: Score the adapted model on each task's query set
        initial: Starting meta model (random initialization by default)

    Returns:
        MetaState after the last iteration
    """
    sources = [source] + list(extra_sources)
    source_labels = [np.array([s[i].label for i in range(len(s))]) for s in sources]
    meta_params = initial.copy() if initial is not None else init_params(arch, seed=seed)
    state = MetaState(meta_params=meta_params)
    rng = np.random.default_rng([seed, 1])

    for iteration in range(1, config.iterations + 1):
        source_index = int(rng.integers(len(sources))) if len(sources) > 1 else 0
        task_seed = int(rng.integers(0, 2 ** 63 - 1))
        task = sample_task(sources[source_index], config, np.random.default_rng(task_seed),
                           source_labels[source_index])

        result = fit(state.meta_params, task.support, _inner_config(config, len(task.support)))
        query_accuracy = None
        if track_query and task.query:
            query_accuracy = score(result.params, task.query).accuracy

        state.meta_params = meta_update(state.meta_params, result.params, config.meta_step)
        state.iteration = iteration
        state.history.append(TaskRecord(
            iteration=iteration,
            task_seed=task_seed,
            source=source_index,
            inner_loss=result.history[-1].loss,
            query_accuracy=query_accuracy
        ))

        if iteration % LOG_EVERY == 0 or iteration == config.iterations:
            recent = [r.query_accuracy for r in state.history[-LOG_EVERY:] if r.query_accuracy is not None]
            recent_text = f"{np.mean(recent):.3f}" if recent else 'n/a'
            logger.info(f"Meta iteration {iteration}/{config.iterations}: "
                        f"inner loss {result.history[-1].loss:.4f}, recent query accuracy {recent_text}")

    return state
