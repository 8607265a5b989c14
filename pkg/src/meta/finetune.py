"""
Local few-shot fine-tuning, testing and the shots sweep.
"""
import logging
from contextlib import nullcontext
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.models import LabeledSample
from src.pipeline import AccessAudit
from src.srnet import GradientDescent, ModelParams, backward, score
from .exceptions import ShotBudgetError


logger = logging.getLogger(__name__)


SWEEP_COLUMNS = ['seed', 'shots', 'accuracy']


@dataclass(frozen=True)
class SweepPoint:
    seed: int
    shots: int
    accuracy: float


def fine_tune(meta_params: ModelParams, support: Sequence[LabeledSample], shots: int,
              learning_rate: float) -> ModelParams:
    """
    Adapt the meta model with `shots` plain gradient steps, one support sample each.

    Shots consume the support set in order.

    Raises:
        ShotBudgetError: If shots < 1 or shots exceeds the support size
    """
    if not 1 <= shots <= len(support):
        raise ShotBudgetError(f"Requested {shots} shots from a support set of {len(support)}")
    optimizer = GradientDescent(learning_rate)
    params = meta_params.copy()
    for i in range(shots):
        sample = support[i]
        params = optimizer.step(params, backward(params, sample.window, sample.label))
    return params


def evaluate(params: ModelParams, test: Sequence[LabeledSample]) -> float:
    """Fraction of test samples predicted correctly; raises EmptyDatasetError on an empty set."""
    return score(params, test).accuracy


def shot_order(support: Sequence[LabeledSample], rng: np.random.Generator) -> List[int]:
    """
    Shuffled support indices alternating between labels (starting from a random label).

    Every prefix of two or more shots then holds both labels while both last.
    """
    labels = np.array([support[i].label for i in range(len(support))])
    pools = [list(rng.permutation(np.flatnonzero(labels == c))) for c in (0, 1)]
    first = int(rng.integers(2))
    order: List[int] = []
    turn = first
    while pools[0] or pools[1]:
        pool = pools[turn] if pools[turn] else pools[1 - turn]
        order.append(int(pool.pop(0)))
        turn = 1 - turn
    return order


def few_shot_sweep(meta_params: ModelParams, support: Sequence[LabeledSample], test: Sequence[LabeledSample],
                   learning_rate: float, seeds: Sequence[int], max_shots: int = 10,
                   audit: Optional[AccessAudit] = None) -> List[SweepPoint]:
    """
    Test accuracy after 1..max_shots fine-tuning shots, for every seed.

    The seed fixes which support samples are used and in which order. All
    fine-tuning finishes before the first test read; with an audit the two
    stages run under the 'train' and 'evaluate' phases.
    """
    if max_shots > len(support):
        raise ShotBudgetError(f"max_shots={max_shots} exceeds the support size {len(support)}")

    adapted = []
    with (audit.phase('train') if audit is not None else nullcontext()):
        for seed in seeds:
            order = shot_order(support, np.random.default_rng(seed))
            ordered = [support[i] for i in order[:max_shots]]
            for shots in range(1, max_shots + 1):
                adapted.append((int(seed), shots, fine_tune(meta_params, ordered, shots, learning_rate)))

    with (audit.phase('evaluate') if audit is not None else nullcontext()):
        points = [SweepPoint(seed=seed, shots=shots, accuracy=evaluate(params, test))
                  for seed, shots, params in adapted]
    if points:
        frame = sweep_frame(points)
        means = frame.groupby('shots')['accuracy'].mean()
        logger.info(f"Few-shot sweep over {len(seeds)} seeds: "
                    f"1 shot {means.iloc[0]:.3f}, {max_shots} shots {means.iloc[-1]:.3f}")
    return points


def sweep_frame(points: Sequence[SweepPoint]) -> pd.DataFrame:
    return pd.DataFrame([(p.seed, p.shots, p.accuracy) for p in points], columns=SWEEP_COLUMNS)


def write_sweep_csv(path: Union[str, Path], points: Sequence[SweepPoint]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sweep_frame(points).to_csv(path, index=False)
    return path
