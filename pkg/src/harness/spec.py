"""
Experiment specifications and reports.

A spec names one (strategy, case) cell of the evaluation protocol together
with the node roles it reads; the reference matrix reproduces the row
structure of the published comparison table.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import pandas as pd

from .exceptions import ExperimentConfigError


NODE_LABELS = {'red': 'Red', 'ca': 'CA', 'cb': 'CB'}
ALL_NODES = ('red', 'ca', 'cb')
DR_NODES = ('ca', 'cb')

CURVE_COLUMNS = ['seed', 'epoch', 'split', 'loss', 'accuracy', 'event']
SWEEP_REPORT_COLUMNS = ['target', 'seed', 'shots', 'accuracy']


class Case(str, Enum):
    """Train/test environment mismatch of a cell."""
    SD = 'SD'
    DA = 'DA'
    DR = 'DR'


class Strategy(str, Enum):
    INDEPENDENT = 'Independent'
    UNIVERSAL = 'Universal'
    FL = 'FL'
    META = 'Meta'


@dataclass(frozen=True)
class ExperimentSpec:
    """
    One cell of the evaluation matrix.

    Attributes:
        case: SD, DA or DR
        strategy: Training strategy
        train_nodes: Nodes whose train splits the strategy trains on (the meta
            source for Meta, the federation members for FL)
        test_nodes: Nodes whose test splits are scored (fine-tuning targets for Meta)
        seeds: Seeds of this cell; empty means the experiment's seed list
    """
    case: Case
    strategy: Strategy
    train_nodes: Tuple[str, ...]
    test_nodes: Tuple[str, ...]
    seeds: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'case', Case(self.case))
        object.__setattr__(self, 'strategy', Strategy(self.strategy))
        object.__setattr__(self, 'train_nodes', tuple(self.train_nodes))
        object.__setattr__(self, 'test_nodes', tuple(self.test_nodes))
        object.__setattr__(self, 'seeds', tuple(int(s) for s in self.seeds))
        self._validate()

    def _validate(self):
        nodes = set(self.train_nodes) | set(self.test_nodes)
        unknown = nodes - set(ALL_NODES)
        if unknown:
            raise ExperimentConfigError(f"Unknown nodes {sorted(unknown)}", field='nodes')
        if not self.train_nodes or not self.test_nodes:
            raise ExperimentConfigError("A spec needs at least one train node and one test node", field='nodes')

        if self.case == Case.SD:
            if self.strategy != Strategy.INDEPENDENT or self.train_nodes != self.test_nodes or len(nodes) != 1:
                raise ExperimentConfigError("SD trains and tests an independent model on one node", field='case')
        elif self.case == Case.DA:
            if 'red' not in nodes or not nodes & set(DR_NODES):
                raise ExperimentConfigError("DA pairs the Red node with a Cellarhead node", field='case')
        elif not nodes <= set(DR_NODES) or len(nodes) != 2:
            raise ExperimentConfigError("DR uses exactly the two Cellarhead road sections", field='case')

        if self.strategy in (Strategy.INDEPENDENT, Strategy.META) and len(self.train_nodes) != 1:
            raise ExperimentConfigError(f"{self.strategy.value} trains on exactly one node", field='train_nodes')
        if self.strategy == Strategy.FL:
            if len(self.train_nodes) < 2 or not set(self.test_nodes) <= set(self.train_nodes):
                raise ExperimentConfigError("FL needs two or more nodes and tests on member nodes",
                                            field='train_nodes')
        if self.strategy == Strategy.META and set(self.test_nodes) & set(self.train_nodes):
            raise ExperimentConfigError("Meta targets must differ from the meta source", field='test_nodes')

    @property
    def nodes(self) -> Tuple[str, ...]:
        """Every node the cell touches, in canonical order."""
        touched = set(self.train_nodes) | set(self.test_nodes)
        return tuple(node for node in ALL_NODES if node in touched)

    @property
    def approach(self) -> str:
        if self.strategy == Strategy.FL:
            return f"FL - {len(self.train_nodes)}Agents"
        if self.strategy == Strategy.META:
            return 'Meta-learning'
        return self.strategy.value

    @property
    def training_label(self) -> str:
        if len(self.train_nodes) == len(ALL_NODES):
            return 'All'
        return '+'.join(NODE_LABELS[node] for node in self.train_nodes)

    @property
    def slug(self) -> str:
        return f"{self.strategy.value.lower()}-{self.case.value.lower()}-{'-'.join(self.train_nodes)}"

    def table_keys(self) -> List[Tuple[str, str, str, str]]:
        """(Approach, Case, Training, Test) of every table row this cell produces."""
        return [(self.approach, self.case.value, self.training_label, NODE_LABELS[node])
                for node in self.test_nodes]


@dataclass(eq=False)
class ExperimentReport:
    """
    Result of one cell on one seed.

    Attributes:
        spec: The cell
        seed: Run seed
        accuracies: Final test accuracy per test node
        curves: Per-epoch rows (CURVE_COLUMNS); FL rows carry aggregation events
        sweep: Few-shot sweep rows (SWEEP_REPORT_COLUMNS), Meta only
        runtime: Wall-clock seconds
        config_digest: Digest of the experiment settings
        peak_rss_mb: Resident memory of the worker when the run finished
        reads: Audited dataset reads keyed "role|phase"
        checkpoint_digest: SHA-256 of the final model checkpoint
    """
    spec: ExperimentSpec
    seed: int
    accuracies: Dict[str, float]
    curves: pd.DataFrame
    config_digest: str
    runtime: float = 0.0
    sweep: Optional[pd.DataFrame] = None
    peak_rss_mb: float = 0.0
    reads: Dict[str, int] = field(default_factory=dict)
    checkpoint_digest: Optional[str] = None

    def table_rows(self) -> List[dict]:
        return [
            {'Approach': self.spec.approach, 'Case': self.spec.case.value,
             'Training': self.spec.training_label, 'Test': NODE_LABELS[node],
             'seed': self.seed, 'accuracy': self.accuracies[node]}
            for node in self.spec.test_nodes
        ]


def reference_matrix() -> List[ExperimentSpec]:
    """The eight cells whose twelve test rows form the comparison table."""
    return [
        ExperimentSpec(Case.DA, Strategy.INDEPENDENT, ('red',), ('ca',)),
        ExperimentSpec(Case.DR, Strategy.INDEPENDENT, ('cb',), ('ca',)),
        ExperimentSpec(Case.DA, Strategy.UNIVERSAL, ALL_NODES, ('red', 'ca')),
        ExperimentSpec(Case.DR, Strategy.UNIVERSAL, DR_NODES, ('ca',)),
        ExperimentSpec(Case.DA, Strategy.FL, ALL_NODES, ALL_NODES),
        ExperimentSpec(Case.DR, Strategy.FL, DR_NODES, DR_NODES),
        ExperimentSpec(Case.DA, Strategy.META, ('red',), ('ca',)),
        ExperimentSpec(Case.DR, Strategy.META, ('cb',), ('ca',)),
    ]


def same_dataset_specs(nodes: Tuple[str, ...] = ALL_NODES) -> List[ExperimentSpec]:
    """Independent SD cells, one per node."""
    return [ExperimentSpec(Case.SD, Strategy.INDEPENDENT, (node,), (node,)) for node in nodes]


def find_spec(strategy: str, case: str, specs: Optional[List[ExperimentSpec]] = None) -> ExperimentSpec:
    """Look up a cell of the reference matrix (plus SD cells) by strategy and case."""
    candidates = specs if specs is not None else reference_matrix() + same_dataset_specs()
    for spec in candidates:
        if spec.strategy == Strategy(strategy) and spec.case == Case(case):
            return spec
    raise ExperimentConfigError(f"No {strategy} cell for case {case}", field='case')
