"""
Node deployment profiles and activity events.
"""
from dataclasses import dataclass, fields
from enum import IntEnum
from typing import Dict, Tuple


Band = Tuple[float, float]


class ActivityKind(IntEnum):
    """Activity classes; the integer value is the training label."""
    WALKING = 0
    CYCLING = 1


@dataclass(frozen=True)
class EventBands:
    """Uniform sampling bands for the parameters of one activity class."""
    speed: Band
    cadence: Band
    amplitude: Band


DEFAULT_WALKING_BANDS = EventBands(speed=(1.0, 1.8), cadence=(1.6, 2.4), amplitude=(0.8, 1.4))
DEFAULT_CYCLING_BANDS = EventBands(speed=(3.0, 7.0), cadence=(1.5, 3.5), amplitude=(0.5, 1.0))


@dataclass(frozen=True)
class NodeProfile:
    """
    Environmental and deployment parameters of one DAS node.

    `attenuation` holds the backscatter amplitude coefficient, written beta for
    the Rayleigh model and alpha when discussing fiber quality; both refer to
    the same multiplicative factor here.
    """
    node_id: str
    gain: float
    attenuation: float
    noise_std: float
    lowpass_cutoff: float
    sampling_rate: int
    bin_spacing: float
    clutter_rate: float
    seed: int
    clutter_amplitude: float = 0.1
    ring_frequency: float = 30.0
    ring_decay: float = 0.04
    walking: EventBands = DEFAULT_WALKING_BANDS
    cycling: EventBands = DEFAULT_CYCLING_BANDS

    @property
    def scale(self) -> float:
        """Combined coupling factor applied to every event."""
        return self.gain * self.attenuation

    def bands_for(self, kind: ActivityKind) -> EventBands:
        return self.cycling if kind == ActivityKind.CYCLING else self.walking

    def numeric_fields(self) -> Dict[str, float]:
        """Scalar physical parameters, excluding identity and seed."""
        skip = {'node_id', 'seed', 'walking', 'cycling'}
        return {f.name: float(getattr(self, f.name)) for f in fields(self) if f.name not in skip}


@dataclass(frozen=True)
class ActivityEvent:
    """
    One moving source observed by the fiber.

    `start_bin` is the fractional fiber bin of the source at window start and
    `start_time` the matching timestamp in seconds since epoch. `phase` offsets
    the first footstep (or the carrier) from the window start, in seconds.
    """
    kind: ActivityKind
    speed: float
    cadence: float
    amplitude: float
    start_bin: float
    start_time: float = 0.0
    phase: float = 0.0
