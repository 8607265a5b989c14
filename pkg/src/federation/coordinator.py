"""
Federated training coordinator.

Each round the coordinator redistributes the global model, lets every
participating node train locally (in parallel when workers > 1), waits for all
uploads, averages them and makes the average the next global model. Nodes
always restart from the redistributed global model, never from their own
previous local model.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.analytics import AGGREGATION_EVENT, EPOCH_EVENT, MetricsCollector
from src.models import NodeProfile
from src.pipeline import AccessAudit, DatasetSplit
from src.srnet import ArchitectureConfig, ModelParams, TrainConfig, init_params, params_digest
from .aggregation import aggregate
from .exceptions import FederationConfigError, NodeConstraintError
from .node import DASNode, NodeUpdate


logger = logging.getLogger(__name__)


MIN_NODES = 2
MIN_NODE_SAMPLES = 5
TRAIN_PHASE = 'train'
EVALUATE_PHASE = 'evaluate'


@dataclass(frozen=True)
class FederationConfig:
    """
    Round schedule and local training setup.

    Attributes:
        rounds: Number of aggregation rounds R
        local_epochs: Local epochs E per round
        train: Local optimizer settings (its `epochs` and `seed` are overridden per round)
        participation: Optional per-round rows of booleans in ascending node id order
        weights: Optional aggregation weight per node id
        workers: Threads used for local rounds
        evaluate_epochs: Score every local epoch snapshot on every test split
    """
    rounds: int = 3
    local_epochs: int = 10
    train: TrainConfig = field(default_factory=TrainConfig)
    participation: Optional[Tuple[Tuple[bool, ...], ...]] = None
    weights: Optional[Mapping[str, float]] = None
    workers: int = 1
    evaluate_epochs: bool = True

    def __post_init__(self):
        if self.rounds < 0 or self.local_epochs < 0:
            raise FederationConfigError("rounds and local_epochs must be >= 0")
        if self.workers < 1:
            raise FederationConfigError(f"workers must be >= 1, got {self.workers}")


@dataclass(eq=False)
class FederationState:
    """Global model, per-node models and the private nodes of one federation."""
    round: int
    global_params: ModelParams
    node_params: Dict[str, ModelParams]
    nodes: Dict[str, DASNode]
    seed: int
    participation_history: List[Tuple[str, ...]] = field(default_factory=list)

    @property
    def node_ids(self) -> List[str]:
        return sorted(self.nodes)

    @property
    def arch(self) -> ArchitectureConfig:
        return self.global_params.arch


@dataclass(eq=False)
class FederationResult:
    state: FederationState
    metrics: MetricsCollector
    digests: List[Tuple[int, str, str]] = field(default_factory=list)


def round_seed(seed: int, round_index: int) -> int:
    """Local training seed of a round; identical for every node."""
    return int(np.random.SeedSequence([seed, round_index]).generate_state(1)[0])


def init_federation(profiles: Sequence[NodeProfile], datasets: Sequence[DatasetSplit],
                    arch: ArchitectureConfig, seed: int,
                    audit: Optional[AccessAudit] = None) -> FederationState:
    """
    Initialize a global model and hand every node a copy of it.

    Args:
        profiles: One profile per node (node ids must be unique)
        datasets: One train/test split per node, same order as `profiles`
        arch: Model architecture
        seed: Initialization seed
        audit: Optional access audit wrapped around every node's data

    Raises:
        FederationConfigError: On fewer than two nodes or mismatched inputs
        NodeConstraintError: If a node holds fewer than five training samples
    """
    if len(profiles) != len(datasets):
        raise FederationConfigError(f"Got {len(profiles)} profiles but {len(datasets)} datasets")
    if len(profiles) < MIN_NODES:
        raise FederationConfigError(f"A federation needs at least {MIN_NODES} nodes, got {len(profiles)}")
    node_ids = [profile.node_id for profile in profiles]
    if len(set(node_ids)) != len(node_ids):
        raise FederationConfigError(f"Node ids must be unique: {node_ids}")

    nodes = {}
    for profile, dataset in zip(profiles, datasets):
        if len(dataset.train) < MIN_NODE_SAMPLES:
            raise NodeConstraintError(
                f"Node {profile.node_id} has {len(dataset.train)} training samples; "
                f"at least {MIN_NODE_SAMPLES} are required"
            )
        nodes[profile.node_id] = DASNode(profile.node_id, dataset.train, dataset.test, audit)

    global_params = init_params(arch, seed=seed)
    logger.info(f"Initialized federation of {len(nodes)} nodes ({', '.join(sorted(nodes))}), "
                f"{global_params.parameter_count} parameters")
    return FederationState(
        round=0,
        global_params=global_params,
        node_params={node_id: global_params.copy() for node_id in sorted(nodes)},
        nodes={node_id: nodes[node_id] for node_id in sorted(nodes)},
        seed=seed
    )


def _local_config(state: FederationState, config: FederationConfig) -> TrainConfig:
    return replace(config.train, epochs=config.local_epochs, seed=round_seed(state.seed, state.round + 1))


def local_round(state: FederationState, node_id: str, config: FederationConfig,
                keep_snapshots: bool = False) -> NodeUpdate:
    """
    Train one node from the current global model; other nodes are untouched.

    The node's entry in `state.node_params` is replaced by the update.
    """
    if node_id not in state.nodes:
        raise FederationConfigError(f"Unknown node {node_id!r}")
    update = state.nodes[node_id].local_update(state.global_params, _local_config(state, config), keep_snapshots)
    state.node_params[node_id] = update.params
    return update


def _participants(state: FederationState, config: FederationConfig, round_index: int) -> List[str]:
    node_ids = state.node_ids
    if config.participation is None:
        return node_ids
    if round_index > len(config.participation):
        return node_ids
    row = config.participation[round_index - 1]
    if len(row) != len(node_ids):
        raise FederationConfigError(f"Participation row {round_index} has {len(row)} entries for {len(node_ids)} nodes")
    return [node_id for node_id, active in zip(node_ids, row) if active]


def _weights(config: FederationConfig, participants: Sequence[str]) -> Optional[List[float]]:
    if config.weights is None:
        return None
    missing = [node_id for node_id in participants if node_id not in config.weights]
    if missing:
        raise FederationConfigError(f"No aggregation weight for nodes {missing}")
    raw = [float(config.weights[node_id]) for node_id in participants]
    total = sum(raw)
    if total <= 0:
        raise FederationConfigError("Aggregation weights of participating nodes sum to zero")
    return [w / total for w in raw]


def _record_node_epochs(state: FederationState, update: NodeUpdate, round_index: int,
                        local_epochs: int, metrics: MetricsCollector) -> None:
    for record, snapshot in zip(update.history, update.snapshots):
        epoch = (round_index - 1) * local_epochs + record.epoch
        metrics.record(round_index, epoch, update.node_id, f"{update.node_id}/train",
                       record.accuracy, record.loss, EPOCH_EVENT)
        for target_id in state.node_ids:
            result = state.nodes[target_id].evaluate(snapshot)
            metrics.record(round_index, epoch, update.node_id, f"{target_id}/test",
                           result.accuracy, result.loss, EPOCH_EVENT)


def run_federation(state: FederationState, config: FederationConfig, rounds: Optional[int] = None,
                   metrics: Optional[MetricsCollector] = None,
                   audit: Optional[AccessAudit] = None) -> FederationResult:
    """
    Run R rounds of local training, aggregation and redistribution.

    Records, for every local epoch, each node model's running train metrics and
    its score on every node's test split, and after every aggregation the
    global model's score on every test split. Epoch indices are cumulative
    across rounds, so aggregation events sit at multiples of E.

    Args:
        state: Federation to advance (modified in place)
        config: Round schedule and local training setup
        rounds: Overrides `config.rounds`
        metrics: Collector to append to (a new one by default)
        audit: Audit whose phase is switched between training and evaluation

    Returns:
        FederationResult with the advanced state, metrics and checkpoint digests
    """
    rounds = config.rounds if rounds is None else rounds
    if rounds < 1:
        raise FederationConfigError(f"rounds must be >= 1, got {rounds}")
    metrics = metrics if metrics is not None else MetricsCollector()
    result = FederationResult(state=state, metrics=metrics)

    for _ in range(rounds):
        round_index = state.round + 1
        participants = _participants(state, config, round_index)
        state.participation_history.append(tuple(participants))
        if not participants:
            logger.warning(f"Round {round_index}: no participating nodes, global model unchanged")
            state.round = round_index
            continue

        started = time.perf_counter()
        keep = config.evaluate_epochs
        with (audit.phase(TRAIN_PHASE) if audit is not None else nullcontext()):
            if config.workers > 1 and len(participants) > 1:
                with ThreadPoolExecutor(max_workers=config.workers) as executor:
                    updates = list(executor.map(lambda nid: local_round(state, nid, config, keep), participants))
            else:
                updates = [local_round(state, node_id, config, keep) for node_id in participants]
        metrics.record_timing('local_round', time.perf_counter() - started)

        with (audit.phase(EVALUATE_PHASE) if audit is not None else nullcontext()):
            if config.evaluate_epochs:
                for update in updates:
                    _record_node_epochs(state, update, round_index, config.local_epochs, metrics)

            state.global_params = aggregate([update.params for update in updates], _weights(config, participants))
            for node_id in state.node_ids:
                state.node_params[node_id] = state.global_params.copy()
            state.round = round_index

            aggregation_epoch = round_index * config.local_epochs
            for target_id in state.node_ids:
                scored = state.nodes[target_id].evaluate(state.global_params)
                metrics.record(round_index, aggregation_epoch, 'global', f"{target_id}/test",
                               scored.accuracy, scored.loss, AGGREGATION_EVENT)

        for update in updates:
            result.digests.append((round_index, update.node_id, params_digest(update.params)))
        result.digests.append((round_index, 'global', params_digest(state.global_params)))

        accuracies = [row.accuracy for row in metrics.rows(node='global', event=AGGREGATION_EVENT)
                      if row.round == round_index]
        logger.info(f"Round {round_index}: aggregated {len(updates)} nodes, "
                    f"mean global test accuracy {np.mean(accuracies):.3f}")

    timing = metrics.get_timing_metrics('local_round')
    logger.info(f"Federation at round {state.round}: {timing['count']} local phases, "
                f"{timing['avg']:.2f}s on average, p95 {timing['p95']:.2f}s")
    for node_id in state.node_ids:
        summary = metrics.get_accuracy_summary(f"{node_id}/test", event=AGGREGATION_EVENT)
        if summary['count']:
            logger.info(f"Global model on {node_id}/test over {summary['count']} aggregations: "
                        f"mean {summary['mean']:.3f}, best {summary['max']:.3f}")
    return result
