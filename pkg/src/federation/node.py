"""
DAS edge node holding a private dataset.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from src.models import LabeledSample
from src.pipeline import AccessAudit, AuditedDataset
from src.srnet import EpochRecord, ModelParams, Score, TrainConfig, fit, score


logger = logging.getLogger(__name__)


@dataclass(eq=False)
class NodeUpdate:
    """What a node uploads after local training: parameters plus training metrics, never samples."""
    node_id: str
    params: ModelParams
    n_samples: int
    history: List[EpochRecord] = field(default_factory=list)
    snapshots: List[ModelParams] = field(default_factory=list)


class DASNode:
    """
    One node of the federation.

    The train and test splits stay inside the node; the coordinator only
    exchanges ModelParams with it and asks it for scores.
    """

    def __init__(self, node_id: str, train: Sequence[LabeledSample], test: Sequence[LabeledSample],
                 audit: Optional[AccessAudit] = None):
        self.node_id = node_id
        if audit is not None:
            self._train = AuditedDataset(train, f"{node_id}/train", audit)
            self._test = AuditedDataset(test, f"{node_id}/test", audit)
        else:
            self._train = list(train)
            self._test = list(test)

    @property
    def n_train(self) -> int:
        return len(self._train)

    @property
    def n_test(self) -> int:
        return len(self._test)

    def local_update(self, global_params: ModelParams, config: TrainConfig,
                     keep_snapshots: bool = False) -> NodeUpdate:
        """Train from the global model for `config.epochs` epochs and upload the result."""
        result = fit(global_params, self._train, config, keep_snapshots=keep_snapshots)
        logger.debug(f"Node {self.node_id}: {result.steps} local steps on {self.n_train} samples")
        return NodeUpdate(
            node_id=self.node_id,
            params=result.params,
            n_samples=self.n_train,
            history=result.history,
            snapshots=result.snapshots
        )

    def evaluate(self, params: ModelParams, split: str = 'test') -> Score:
        """Score `params` on the node's own train or test split."""
        if split not in ('train', 'test'):
            raise ValueError(f"Unknown split {split!r}")
        return score(params, self._test if split == 'test' else self._train)

    def __repr__(self) -> str:
        return f"DASNode({self.node_id!r}, train={self.n_train}, test={self.n_test})"
