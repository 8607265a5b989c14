"""
The four training strategies of the evaluation protocol.

Every strategy receives the audited train/test splits of the nodes its cell
touches and returns final test accuracies plus per-epoch curve rows. Training
reads happen inside a training phase of the audit and every test read inside
the evaluation phase.
"""
import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.analytics import AGGREGATION_EVENT, EPOCH_EVENT
from src.config import ExperimentSettings
from src.federation import FederationConfig, FederationResult, init_federation, run_federation
from src.meta import MetaState, few_shot_sweep, meta_train
from src.models import LabeledSample
from src.pipeline import AccessAudit, AuditedDataset, DatasetSplit
from src.srnet import ModelParams, fit, init_params, score
from .data import node_profiles
from .spec import CURVE_COLUMNS, SWEEP_REPORT_COLUMNS, ExperimentSpec, Strategy


logger = logging.getLogger(__name__)


TRAIN_PHASE = 'train'
SOURCE_PHASE = 'source-train'
EVALUATE_PHASE = 'evaluate'
TRAINING_PHASES = (TRAIN_PHASE, SOURCE_PHASE)


@dataclass(eq=False)
class StrategyOutcome:
    accuracies: Dict[str, float]
    curves: pd.DataFrame
    params: ModelParams
    sweep: Optional[pd.DataFrame] = None
    meta_state: Optional[MetaState] = None
    federation: Optional[FederationResult] = None
    federation_config: Optional[FederationConfig] = None


@dataclass(frozen=True, eq=False)
class AuditedSplits:
    """Audited train and test sides of every node in a cell."""
    train: Dict[str, AuditedDataset]
    test: Dict[str, AuditedDataset]
    raw: Dict[str, DatasetSplit]


def audited_splits(splits: Dict[str, DatasetSplit], audit: AccessAudit) -> AuditedSplits:
    return AuditedSplits(
        train={node: AuditedDataset(s.train, f"{node}/train", audit) for node, s in splits.items()},
        test={node: AuditedDataset(s.test, f"{node}/test", audit) for node, s in splits.items()},
        raw=dict(splits)
    )


def sweep_seeds(seed: int, count: int) -> List[int]:
    """Fine-tuning seeds of one run; derived from the run seed only."""
    return [int(s) for s in np.random.SeedSequence([seed, 2]).generate_state(count)]


def _fit_and_track(spec: ExperimentSpec, train_data: Sequence[LabeledSample], data: AuditedSplits,
                   settings: ExperimentSettings, seed: int, audit: AccessAudit) -> StrategyOutcome:
    params = init_params(settings.arch, seed=seed)
    with audit.phase(TRAIN_PHASE):
        result = fit(params, train_data, replace(settings.train, seed=seed), keep_snapshots=True)

    rows = []
    with audit.phase(EVALUATE_PHASE):
        for record, snapshot in zip(result.history, result.snapshots):
            rows.append((seed, record.epoch, 'train', record.loss, record.accuracy, EPOCH_EVENT))
            for node in spec.test_nodes:
                scored = score(snapshot, data.test[node])
                rows.append((seed, record.epoch, f"{node}/test", scored.loss, scored.accuracy, EPOCH_EVENT))
        accuracies = {node: score(result.params, data.test[node]).accuracy for node in spec.test_nodes}

    return StrategyOutcome(
        accuracies=accuracies,
        curves=pd.DataFrame(rows, columns=CURVE_COLUMNS),
        params=result.params
    )


def run_independent(spec: ExperimentSpec, data: AuditedSplits, settings: ExperimentSettings,
                    seed: int, audit: AccessAudit) -> StrategyOutcome:
    """Train on one node's train split, test on the target test splits."""
    return _fit_and_track(spec, data.train[spec.train_nodes[0]], data, settings, seed, audit)


def run_universal(spec: ExperimentSpec, data: AuditedSplits, settings: ExperimentSettings,
                  seed: int, audit: AccessAudit) -> StrategyOutcome:
    """Train one model on the concatenated train splits of every member node."""
    with audit.phase(TRAIN_PHASE):
        pooled = [data.train[node][i] for node in spec.train_nodes for i in range(len(data.train[node]))]
    sizes = ', '.join(f"{node}={len(data.train[node])}" for node in spec.train_nodes)
    logger.info(f"Universal pool of {len(pooled)} samples ({sizes})")
    return _fit_and_track(spec, pooled, data, settings, seed, audit)


def _federation_curves(frame: pd.DataFrame, seed: int) -> pd.DataFrame:
    """
    Collapse node-level federation rows into curve rows.

    Train rows average every node's own running metrics; validation rows on a
    node's test split average the other nodes' local models, and aggregation
    rows hold the global model's score.
    """
    epochs = frame[frame['event'] == EPOCH_EVENT]
    own_train = epochs[epochs['split'] == epochs['node'] + '/train']
    cross = epochs[epochs['split'].str.endswith('/test') & (epochs['split'] != epochs['node'] + '/test')]
    aggregations = frame[frame['event'] == AGGREGATION_EVENT]

    parts = []
    if not own_train.empty:
        train = own_train.groupby('epoch', sort=True)[['loss', 'accuracy']].mean().reset_index()
        train['split'] = 'train'
        train['event'] = EPOCH_EVENT
        parts.append(train)
    if not cross.empty:
        validation = cross.groupby(['epoch', 'split'], sort=True)[['loss', 'accuracy']].mean().reset_index()
        validation['event'] = EPOCH_EVENT
        parts.append(validation)
    if not aggregations.empty:
        parts.append(aggregations[['epoch', 'split', 'loss', 'accuracy', 'event']])
    if not parts:
        return pd.DataFrame(columns=CURVE_COLUMNS)

    curves = pd.concat(parts, ignore_index=True)
    curves['seed'] = seed
    curves['order'] = (curves['event'] == AGGREGATION_EVENT).astype(int)
    curves = curves.sort_values(['epoch', 'order', 'split'], kind='mergesort')
    return curves[CURVE_COLUMNS].reset_index(drop=True)


def run_fl(spec: ExperimentSpec, data: AuditedSplits, settings: ExperimentSettings,
           seed: int, audit: AccessAudit) -> StrategyOutcome:
    """FedAvg across the member nodes; the final global model is scored on every test split."""
    profiles = node_profiles(settings)
    members = list(spec.train_nodes)
    state = init_federation([profiles[node] for node in members], [data.raw[node] for node in members],
                            settings.arch, seed, audit)
    config = replace(settings.federation, train=settings.train)
    result = run_federation(state, config, audit=audit)

    frame = result.metrics.to_frame(include_event=True)
    final = frame[(frame['event'] == AGGREGATION_EVENT) & (frame['round'] == state.round)]
    accuracies = {
        node: float(final.loc[final['split'] == f"{node}/test", 'accuracy'].iloc[0])
        for node in spec.test_nodes
    }
    return StrategyOutcome(
        accuracies=accuracies,
        curves=_federation_curves(frame, seed),
        params=state.global_params,
        federation=result,
        federation_config=config
    )


def run_meta(spec: ExperimentSpec, data: AuditedSplits, settings: ExperimentSettings,
             seed: int, audit: AccessAudit) -> StrategyOutcome:
    """
    Reptile on the source train split, then a few-shot sweep on every target.

    A target's reported accuracy is the sweep mean at `harness.shots` shots.
    """
    source = spec.train_nodes[0]
    with audit.phase(SOURCE_PHASE):
        state = meta_train(data.train[source], settings.arch, settings.meta, seed)

    rows = []
    for record in state.history:
        rows.append((seed, record.iteration, 'support', record.inner_loss, np.nan, EPOCH_EVENT))
        if record.query_accuracy is not None:
            rows.append((seed, record.iteration, 'query', np.nan, record.query_accuracy, EPOCH_EVENT))

    seeds = sweep_seeds(seed, settings.harness.sweep_seeds)
    sweep_rows = []
    accuracies = {}
    for target in spec.test_nodes:
        points = few_shot_sweep(state.meta_params, data.train[target], data.test[target],
                                settings.meta.finetune_lr, seeds, max_shots=settings.meta.shot_budget,
                                audit=audit)
        sweep_rows.extend((target, p.seed, p.shots, p.accuracy) for p in points)
        at_budget = [p.accuracy for p in points if p.shots == settings.harness.shots]
        accuracies[target] = float(np.mean(at_budget))

    return StrategyOutcome(
        accuracies=accuracies,
        curves=pd.DataFrame(rows, columns=CURVE_COLUMNS),
        params=state.meta_params,
        sweep=pd.DataFrame(sweep_rows, columns=SWEEP_REPORT_COLUMNS),
        meta_state=state
    )


StrategyRunner = Callable[[ExperimentSpec, AuditedSplits, ExperimentSettings, int, AccessAudit], StrategyOutcome]

STRATEGIES: Dict[Strategy, StrategyRunner] = {
    Strategy.INDEPENDENT: run_independent,
    Strategy.UNIVERSAL: run_universal,
    Strategy.FL: run_fl,
    Strategy.META: run_meta,
}


def check_isolation(spec: ExperimentSpec, audit: AccessAudit) -> None:
    """
    Raises:
        LeakageError: If a test split was read while training, or a target's
            train split was read while training on the source nodes
    """
    audit.assert_no_reads([f"{node}/test" for node in spec.nodes], TRAINING_PHASES)
    held_out = [f"{node}/train" for node in spec.test_nodes if node not in spec.train_nodes]
    source_phase = SOURCE_PHASE if spec.strategy == Strategy.META else TRAIN_PHASE
    audit.assert_no_reads(held_out, [source_phase])
