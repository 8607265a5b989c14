"""
Deterministic train/test splits and their plain-text manifests.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from src.models import LabeledSample
from .exceptions import PipelineError, TooFewSamplesError


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DatasetSplit:
    """Disjoint train/test partition of a dataset, with the source indices of each side."""
    train: List[LabeledSample]
    test: List[LabeledSample]
    split_ratio: float
    split_seed: int
    train_indices: List[int]
    test_indices: List[int]


def train_count(n_samples: int, ratio: float) -> int:
    """Number of training samples: ratio * n rounded half up, at least one per side."""
    return min(max(int(np.floor(ratio * n_samples + 0.5)), 1), n_samples - 1)


def _class_quotas(labels: np.ndarray, n_train: int) -> Dict[int, int]:
    """Split `n_train` across classes proportionally, largest remainder first."""
    classes, counts = np.unique(labels, return_counts=True)
    exact = counts * n_train / labels.size
    quotas = np.floor(exact).astype(int)
    remainder = n_train - int(quotas.sum())
    order = sorted(range(len(classes)), key=lambda i: (-(exact[i] - quotas[i]), classes[i]))
    for i in order[:remainder]:
        quotas[i] += 1
    return {int(c): int(q) for c, q in zip(classes, quotas)}


def split(samples: Sequence[LabeledSample], ratio: float, seed: int,
          stratified: bool = True) -> DatasetSplit:
    """
    Shuffle and partition samples into train and test sides.

    Args:
        samples: Source dataset
        ratio: Train fraction, in (0, 1)
        seed: Shuffle seed
        stratified: Keep each label's share close to its share of the source

    Returns:
        DatasetSplit

    Raises:
        TooFewSamplesError: If fewer than two samples are given
        ValueError: If ratio is outside (0, 1)
    """
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    n_samples = len(samples)
    if n_samples < 2:
        raise TooFewSamplesError(f"Need at least 2 samples to split, got {n_samples}")

    rng = np.random.default_rng(seed)
    n_train = train_count(n_samples, ratio)

    if stratified:
        labels = np.array([sample.label for sample in samples])
        train_indices: List[int] = []
        for label, quota in _class_quotas(labels, n_train).items():
            members = np.flatnonzero(labels == label)
            train_indices.extend(int(i) for i in rng.permutation(members)[:quota])
        train_indices = [train_indices[i] for i in rng.permutation(len(train_indices))]
    else:
        train_indices = [int(i) for i in rng.permutation(n_samples)[:n_train]]

    chosen = set(train_indices)
    test_indices = [i for i in range(n_samples) if i not in chosen]
    logger.debug(f"Split {n_samples} samples into {len(train_indices)} train / {len(test_indices)} test")

    return DatasetSplit(
        train=[samples[i] for i in train_indices],
        test=[samples[i] for i in test_indices],
        split_ratio=ratio,
        split_seed=seed,
        train_indices=train_indices,
        test_indices=test_indices
    )


def write_split_manifest(path: Union[str, Path], dataset_split: DatasetSplit) -> None:
    """Write the sample indices of each side as plain text."""
    lines = [
        f"ratio {dataset_split.split_ratio!r}",
        f"seed {dataset_split.split_seed}",
        'train ' + ' '.join(str(i) for i in dataset_split.train_indices),
        'test ' + ' '.join(str(i) for i in dataset_split.test_indices),
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')


def read_split_manifest(path: Union[str, Path]) -> Tuple[float, int, List[int], List[int]]:
    """
    Parse a split manifest.

    Returns:
        (ratio, seed, train_indices, test_indices)
    """
    entries = {}
    for line in Path(path).read_text(encoding='utf-8').splitlines():
        key, _, value = line.partition(' ')
        entries[key] = value.strip()
    try:
        return (
            float(entries['ratio']),
            int(entries['seed']),
            [int(i) for i in entries['train'].split()],
            [int(i) for i in entries['test'].split()]
        )
    except (KeyError, ValueError) as e:
        raise PipelineError(f"Malformed split manifest {path}: {e}")


def apply_split_manifest(samples: Sequence[LabeledSample], path: Union[str, Path]) -> DatasetSplit:
    """Rebuild a split from a stored manifest."""
    ratio, seed, train_indices, test_indices = read_split_manifest(path)
    if sorted(train_indices + test_indices) != list(range(len(samples))):
        raise PipelineError(f"Split manifest {path} does not partition {len(samples)} samples")
    return DatasetSplit(
        train=[samples[i] for i in train_indices],
        test=[samples[i] for i in test_indices],
        split_ratio=ratio,
        split_seed=seed,
        train_indices=train_indices,
        test_indices=test_indices
    )
