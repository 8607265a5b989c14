"""
Preprocessing of continuous recordings: timing synchronization, window
sampling, cleaning and labeling.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.models import ActivityKind, LabeledSample, NodeProfile, PhaseRecording, PhaseWindow, Track
from src.synth import nearest_index
from .exceptions import SynchronizationGapError, WindowOutOfBoundsError


logger = logging.getLogger(__name__)


THRESHOLD_NOISE_MULTIPLE = 3.0


class Validity(Enum):
    VALID = 'valid'
    INVALID = 'invalid'


@dataclass(frozen=True, eq=False)
class AlignedTrack:
    """Recording columns and fiber bins matched to every point of one track."""
    track_id: int
    kind: ActivityKind
    columns: np.ndarray
    bins: np.ndarray


@dataclass(frozen=True, eq=False)
class ExtractionResult:
    samples: List[LabeledSample]
    rejected: int
    skipped: int


def synchronize(tracks: Sequence[Track], recording: PhaseRecording) -> List[AlignedTrack]:
    """
    Align ground-truth tracks with a recording sharing the same epoch.

    Every track timestamp is mapped to its nearest recording column and every
    position to its nearest fiber bin; exact halves resolve to the lower index.

    Args:
        tracks: Timestamped position streams
        recording: Continuous phase recording

    Returns:
        One AlignedTrack per input track, in input order

    Raises:
        SynchronizationGapError: If a timestamp is outside the recording span
            or a track's timestamps are not monotone
    """
    aligned = []
    for track in tracks:
        timestamps = np.asarray(track.timestamps, dtype=float)
        if timestamps.size and np.any(np.diff(timestamps) < 0):
            raise SynchronizationGapError(f"Track {track.track_id} timestamps are not monotone")

        outside = (timestamps < recording.start_time) | (timestamps > recording.end_time)
        if np.any(outside):
            first = float(timestamps[np.argmax(outside)])
            raise SynchronizationGapError(
                f"Track {track.track_id} timestamp {first:.3f} is outside the recording span "
                f"[{recording.start_time:.3f}, {recording.end_time:.3f}]"
            )

        columns = nearest_index((timestamps - recording.start_time) * recording.sampling_rate)
        bins = nearest_index(np.asarray(track.positions, dtype=float) / recording.bin_spacing)
        aligned.append(AlignedTrack(
            track_id=track.track_id,
            kind=track.kind,
            columns=np.atleast_1d(columns),
            bins=np.atleast_1d(bins)
        ))

    logger.debug(f"Synchronized {len(aligned)} tracks with recording {recording.node_id}")
    return aligned


def window_sample(recording: PhaseRecording, bin: int, time: int, height: int, width: int) -> PhaseWindow:
    """
    Cut rows [bin, bin + height) and columns [time, time + width) out of a recording.

    The window owns a copy of its values; the recording is not modified.

    Raises:
        WindowOutOfBoundsError: If the region does not fit inside the recording
    """
    if height < 1 or width < 1:
        raise WindowOutOfBoundsError(f"Window size must be positive, got {height}x{width}")
    if bin < 0 or time < 0 or bin + height > recording.n_bins or time + width > recording.n_samples:
        raise WindowOutOfBoundsError(
            f"Window rows [{bin}, {bin + height}) x columns [{time}, {time + width}) "
            f"exceed recording {recording.n_bins}x{recording.n_samples}"
        )
    return PhaseWindow(
        data=recording.data[bin:bin + height, time:time + width].copy(),
        origin_bin=int(bin),
        origin_time=recording.start_time + time / recording.sampling_rate,
        node_id=recording.node_id
    )


def default_threshold(profile: NodeProfile) -> float:
    """Cleaning threshold tied to the node's noise floor."""
    return THRESHOLD_NOISE_MULTIPLE * profile.noise_std


def validity(window: PhaseWindow, x_th: float) -> Validity:
    """A window is valid only if its largest absolute phase shift exceeds `x_th`."""
    if x_th < 0:
        raise ValueError(f"x_th must be >= 0, got {x_th}")
    return Validity.VALID if window.max_abs() > x_th else Validity.INVALID


def clean(samples: Sequence[LabeledSample], x_th: float) -> Tuple[List[LabeledSample], int]:
    """
    Discard invalid windows.

    Returns:
        (valid samples in input order, number rejected)
    """
    kept = [sample for sample in samples if validity(sample.window, x_th) == Validity.VALID]
    rejected = len(samples) - len(kept)
    if rejected:
        logger.warning(f"Rejected {rejected} of {len(samples)} windows at x_th={x_th:.4f}")
    return kept, rejected


def extract_samples(recording: PhaseRecording, tracks: Sequence[Track], shape: Tuple[int, int],
                    x_th: float, bin_offset: Optional[int] = None) -> ExtractionResult:
    """
    Turn a recording and its tracks into cleaned, labeled windows.

    Each window is anchored at the first synchronized point of its track: the
    column of that point, and the nearest bin minus `bin_offset` rows
    (a quarter of the window height by default) so the trace runs through the
    frame. Windows that fall off the recording are skipped; windows failing the
    validity rule are rejected.
    """
    height, width = shape
    offset = height // 4 if bin_offset is None else bin_offset
    labeled = []
    skipped = 0
    for aligned in synchronize(tracks, recording):
        if aligned.columns.size == 0:
            skipped += 1
            continue
        try:
            window = window_sample(
                recording, int(aligned.bins[0]) - offset, int(aligned.columns[0]), height, width
            )
        except WindowOutOfBoundsError as e:
            logger.warning(f"Skipping track {aligned.track_id}: {e}")
            skipped += 1
            continue
        labeled.append(LabeledSample(window=window, label=int(aligned.kind)))

    samples, rejected = clean(labeled, x_th)
    logger.info(f"Extracted {len(samples)} samples from {recording.node_id} "
                f"({rejected} rejected, {skipped} skipped)")
    return ExtractionResult(samples=samples, rejected=rejected, skipped=skipped)
