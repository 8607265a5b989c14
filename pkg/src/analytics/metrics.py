"""
Metrics collection for training runs.

Rows follow the run CSV layout (round, epoch, node, split, accuracy, loss) with
an `event` tag telling local-epoch rows from aggregation rows. Stage timings are
kept alongside for run reports.
"""
import logging
import statistics
import threading
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import pandas as pd

from src.analytics.exceptions import InvalidAccuracyError, UnknownEventError


logger = logging.getLogger(__name__)


METRIC_COLUMNS = ['round', 'epoch', 'node', 'split', 'accuracy', 'loss']

EPOCH_EVENT = 'epoch'
AGGREGATION_EVENT = 'aggregation'


@dataclass(frozen=True)
class MetricRow:
    round: int
    epoch: int
    node: str
    split: str
    accuracy: float
    loss: float
    event: str = EPOCH_EVENT


class MetricsCollector:
    """Thread-safe collector of metric rows and stage timings."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self._rows: List[MetricRow] = []
        self._timings = defaultdict(list)
        self._lock = threading.Lock()

    def record(self, round: int, epoch: int, node: str, split: str, accuracy: float, loss: float,
               event: str = EPOCH_EVENT) -> None:
        """Record one evaluation."""
        if not self.enabled:
            return
        if not 0.0 <= accuracy <= 1.0:
            raise InvalidAccuracyError(accuracy)
        if event not in (EPOCH_EVENT, AGGREGATION_EVENT):
            raise UnknownEventError(event)
        row = MetricRow(int(round), int(epoch), str(node), str(split), float(accuracy), float(loss), event)
        with self._lock:
            self._rows.append(row)

    def record_timing(self, stage: str, seconds: float) -> None:
        if not self.enabled:
            return
        with self._lock:
            self._timings[stage].append(float(seconds))

    def rows(self, node: Optional[str] = None, split: Optional[str] = None,
             event: Optional[str] = None) -> List[MetricRow]:
        with self._lock:
            rows = list(self._rows)
        return [
            row for row in rows
            if (node is None or row.node == node)
            and (split is None or row.split == split)
            and (event is None or row.event == event)
        ]

    def timings(self) -> Dict[str, List[float]]:
        with self._lock:
            return {stage: list(values) for stage, values in self._timings.items()}

    def get_timing_metrics(self, stage: str) -> Dict[str, float]:
        """Summary statistics of one stage's durations."""
        with self._lock:
            durations = sorted(self._timings.get(stage, []))

        if not durations:
            return {'count': 0, 'avg': 0, 'min': 0, 'max': 0, 'median': 0, 'p95': 0}

        return {
            'count': len(durations),
            'avg': statistics.mean(durations),
            'min': durations[0],
            'max': durations[-1],
            'median': statistics.median(durations),
            'p95': self._percentile(durations, 95)
        }

    def get_accuracy_summary(self, split: str, event: Optional[str] = None) -> Dict[str, Any]:
        """Mean and spread of the accuracies recorded on one split."""
        accuracies = [row.accuracy for row in self.rows(split=split, event=event)]
        if not accuracies:
            return {'count': 0, 'mean': 0, 'std': 0, 'min': 0, 'max': 0}
        return {
            'count': len(accuracies),
            'mean': statistics.mean(accuracies),
            'std': statistics.pstdev(accuracies),
            'min': min(accuracies),
            'max': max(accuracies)
        }

    def to_frame(self, include_event: bool = False) -> pd.DataFrame:
        """Rows as a DataFrame in recording order."""
        records = [asdict(row) for row in self.rows()]
        frame = pd.DataFrame.from_records(records, columns=METRIC_COLUMNS + ['event'])
        return frame if include_event else frame[METRIC_COLUMNS]

    def _percentile(self, data: List[float], percentile: int) -> float:
        """Linear-interpolated percentile of sorted data."""
        if not data:
            return 0.0

        index = (percentile / 100.0) * (len(data) - 1)
        lower_index = int(index)
        upper_index = min(lower_index + 1, len(data) - 1)

        if lower_index == upper_index:
            return data[lower_index]

        weight = index - lower_index
        return data[lower_index] * (1 - weight) + data[upper_index] * weight
