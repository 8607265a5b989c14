"""
Phase windows, labeled samples and continuous recordings.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .profiles import ActivityKind


@dataclass(frozen=True, eq=False)
class PhaseWindow:
    """H x W block of phase shifts; rows are fiber bins, columns are time samples."""
    data: np.ndarray
    origin_bin: int
    origin_time: float
    node_id: str

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """A window with its activity label (0 = walking, 1 = cycling)."""
    window: PhaseWindow
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"Label must be 0 or 1, got {self.label}")

    @property
    def kind(self) -> ActivityKind:
        return ActivityKind(self.label)


@dataclass(frozen=True, eq=False)
class PhaseRecording:
    """Continuous interrogator output for a stretch of fiber."""
    data: np.ndarray
    start_time: float
    sampling_rate: float
    bin_spacing: float
    node_id: str

    @property
    def n_bins(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def end_time(self) -> float:
        """Timestamp of the last column."""
        return self.start_time + (self.n_samples - 1) / self.sampling_rate


@dataclass(frozen=True, eq=False)
class Track:
    """Timestamped ground-truth positions (meters along the fiber) of one traveler."""
    track_id: int
    kind: ActivityKind
    timestamps: np.ndarray
    positions: np.ndarray

    def __len__(self) -> int:
        return len(self.timestamps)
