"""
Experiment harness: evaluation cells, strategies, matrix runs, curves and the CLI.
"""
from .spec import (
    ALL_NODES,
    Case,
    ExperimentReport,
    ExperimentSpec,
    Strategy,
    find_spec,
    reference_matrix,
    same_dataset_specs
)
from .data import node_profiles, node_samples, node_splits
from .strategies import STRATEGIES, StrategyOutcome, check_isolation, sweep_seeds
from .runner import MatrixReport, run_case, run_matrix, summarize, write_matrix_outputs
from .curves import aggregation_jumps, emit_curves
from .exceptions import HarnessError, ExperimentConfigError


__all__ = [
    'ALL_NODES',
    'Case',
    'ExperimentReport',
    'ExperimentSpec',
    'Strategy',
    'find_spec',
    'reference_matrix',
    'same_dataset_specs',
    'node_profiles',
    'node_samples',
    'node_splits',
    'STRATEGIES',
    'StrategyOutcome',
    'check_isolation',
    'sweep_seeds',
    'MatrixReport',
    'run_case',
    'run_matrix',
    'summarize',
    'write_matrix_outputs',
    'aggregation_jumps',
    'emit_curves',
    'HarnessError',
    'ExperimentConfigError'
]
