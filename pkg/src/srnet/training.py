"""
Mini-batch training loop.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import expit

from src.models import LabeledSample
from .exceptions import EmptyDatasetError
from .network import backward_batch, decide, forward_batch, stack_windows
from .optimizer import Adam
from .params import ModelParams


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """
    Local training hyperparameters; the loss is always binary cross-entropy.

    A learning rate of exactly 0 is accepted and leaves parameters untouched.
    """
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 16
    epochs: int = 10
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")

    def to_dict(self) -> dict:
        return asdict(self)

    def make_optimizer(self) -> Adam:
        return Adam(self.learning_rate, self.beta1, self.beta2, self.epsilon)


@dataclass(frozen=True)
class EpochRecord:
    """Running training metrics of one epoch, measured before each batch update."""
    epoch: int
    loss: float
    accuracy: float


@dataclass(eq=False)
class FitResult:
    params: ModelParams
    history: List[EpochRecord] = field(default_factory=list)
    snapshots: List[ModelParams] = field(default_factory=list)
    steps: int = 0


EpochCallback = Callable[[int, ModelParams], None]


def fit(params: ModelParams, dataset: Sequence[LabeledSample], config: TrainConfig,
        optimizer=None, keep_snapshots: bool = False,
        on_epoch_end: Optional[EpochCallback] = None) -> FitResult:
    """
    Minimize mean BCE over `dataset` with mini-batch updates.

    Batch order is drawn from a generator seeded with `config.seed`; the batch
    gradient is the mean over the batch. The input parameters are never
    modified.

    Args:
        params: Starting parameters
        dataset: Labeled samples (any indexable sequence)
        config: Training hyperparameters
        optimizer: Optimizer with a `step(params, grads)` method; a fresh Adam by default
        keep_snapshots: Keep a copy of the parameters after every epoch
        on_epoch_end: Called with (epoch, params) after every epoch

    Returns:
        FitResult with final parameters, per-epoch history and optional snapshots

    Raises:
        EmptyDatasetError: If `dataset` is empty
    """
    n = len(dataset)
    if n == 0:
        raise EmptyDatasetError("Cannot train on an empty dataset")

    optimizer = optimizer if optimizer is not None else config.make_optimizer()
    rng = np.random.default_rng(config.seed)
    current = params.copy()
    result = FitResult(params=current)

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, n, config.batch_size):
            batch = [dataset[int(i)] for i in order[start:start + config.batch_size]]
            inputs, labels = stack_windows(batch)
            logits, cache = forward_batch(current, inputs)
            batch_loss, grads = backward_batch(current, cache, labels)
            current = optimizer.step(current, grads)

            epoch_loss += batch_loss * len(batch)
            epoch_correct += int(np.sum(decide(expit(logits)) == labels.astype(np.int64)))
            result.steps += 1

        record = EpochRecord(epoch=epoch, loss=epoch_loss / n, accuracy=epoch_correct / n)
        result.history.append(record)
        if keep_snapshots:
            result.snapshots.append(current.copy())
        if on_epoch_end is not None:
            on_epoch_end(epoch, current)
        logger.debug(f"Epoch {epoch}/{config.epochs}: loss={record.loss:.4f} accuracy={record.accuracy:.3f}")

    result.params = current
    return result


def train_local(params: ModelParams, dataset: Sequence[LabeledSample], config: TrainConfig) -> ModelParams:
    """Train a copy of `params` on `dataset` and return it."""
    result = fit(params, dataset, config)
    if result.history:
        last = result.history[-1]
        logger.info(f"Trained {result.steps} steps over {len(dataset)} samples: "
                    f"final loss={last.loss:.4f} accuracy={last.accuracy:.3f}")
    return result.params
