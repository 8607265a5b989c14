"""
Federated averaging across simulated DAS nodes.
"""
from .aggregation import aggregate
from .node import DASNode, NodeUpdate
from .coordinator import (
    FederationConfig,
    FederationResult,
    FederationState,
    init_federation,
    local_round,
    round_seed,
    run_federation
)
from .manifest import write_federation_outputs
from .exceptions import FederationError, FederationConfigError, NodeConstraintError


__all__ = [
    'aggregate',
    'DASNode',
    'NodeUpdate',
    'FederationConfig',
    'FederationResult',
    'FederationState',
    'init_federation',
    'local_round',
    'round_seed',
    'run_federation',
    'write_federation_outputs',
    'FederationError',
    'FederationConfigError',
    'NodeConstraintError'
]
