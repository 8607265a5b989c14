"""
Reference node profiles.

The Red-like node is a shallow dark fiber sampled at 500 Hz; the CA-like and
CB-like nodes are deeper sheathed fibers on two stretches of the same road,
sampled at 750 Hz. The amplitude bands are inverted between the two sites so a
classifier that keys on raw amplitude at one site fails at the other.
"""
from typing import Dict, Tuple

from src.models import EventBands, NodeProfile


RED_WALKING = EventBands(speed=(1.0, 1.8), cadence=(1.6, 2.4), amplitude=(0.9, 1.6))
RED_CYCLING = EventBands(speed=(3.0, 7.0), cadence=(1.5, 3.5), amplitude=(0.5, 0.9))
CA_WALKING = EventBands(speed=(1.0, 1.8), cadence=(1.6, 2.4), amplitude=(0.5, 0.9))
CA_CYCLING = EventBands(speed=(3.0, 7.0), cadence=(1.5, 3.5), amplitude=(1.3, 1.7))
CB_WALKING = EventBands(speed=(1.0, 1.8), cadence=(1.6, 2.4), amplitude=(0.55, 0.95))
CB_CYCLING = EventBands(speed=(3.0, 7.0), cadence=(1.5, 3.5), amplitude=(1.2, 1.6))


def reference_profiles() -> Tuple[NodeProfile, NodeProfile, NodeProfile]:
    """
    Return the Red-like, CA-like and CB-like reference profiles.

    CA and CB deviate from each other less, in every numeric field, than
    either deviates from Red.
    """
    red = NodeProfile(
        node_id='red', gain=1.6, attenuation=0.55, noise_std=0.03, lowpass_cutoff=60.0,
        sampling_rate=500, bin_spacing=1.0, clutter_rate=0.5, seed=2022,
        clutter_amplitude=0.1, ring_frequency=30.0, ring_decay=0.04,
        walking=RED_WALKING, cycling=RED_CYCLING
    )
    ca = NodeProfile(
        node_id='ca', gain=1.2, attenuation=0.97, noise_std=0.06, lowpass_cutoff=25.0,
        sampling_rate=750, bin_spacing=2.0, clutter_rate=1.5, seed=2023,
        clutter_amplitude=0.2, ring_frequency=26.0, ring_decay=0.05,
        walking=CA_WALKING, cycling=CA_CYCLING
    )
    cb = NodeProfile(
        node_id='cb', gain=1.1, attenuation=0.95, noise_std=0.055, lowpass_cutoff=28.0,
        sampling_rate=750, bin_spacing=2.1, clutter_rate=1.4, seed=2024,
        clutter_amplitude=0.19, ring_frequency=25.0, ring_decay=0.048,
        walking=CB_WALKING, cycling=CB_CYCLING
    )
    return red, ca, cb


def fast_profiles() -> Tuple[NodeProfile, NodeProfile, NodeProfile]:
    """
    Down-sampled counterparts of the reference profiles for small windows.

    Sampling rates drop to 100/150 Hz and the footstep ring to 15 Hz so a
    16 x 128 window still spans more than a second and keeps every ordering
    of the reference set.
    """
    red, ca, cb = reference_profiles()
    return (
        _rescale(red, sampling_rate=100, lowpass_cutoff=30.0, ring_frequency=15.0, ring_decay=0.06),
        _rescale(ca, sampling_rate=150, lowpass_cutoff=12.0, ring_frequency=13.0, ring_decay=0.075),
        _rescale(cb, sampling_rate=150, lowpass_cutoff=13.5, ring_frequency=12.5, ring_decay=0.072),
    )


def _rescale(profile: NodeProfile, **changes) -> NodeProfile:
    values = {name: getattr(profile, name) for name in profile.__dataclass_fields__}
    values.update(changes)
    return NodeProfile(**values)


def profiles_by_id(profiles) -> Dict[str, NodeProfile]:
    return {profile.node_id: profile for profile in profiles}


def relative_deviation(first: NodeProfile, second: NodeProfile) -> Dict[str, float]:
    """
    Per-field relative deviation |a - b| / max(|a|, |b|) of two profiles.

    Fields equal to zero on both sides deviate by 0.
    """
    a = first.numeric_fields()
    b = second.numeric_fields()
    deviations = {}
    for name, value in a.items():
        other = b[name]
        scale = max(abs(value), abs(other))
        deviations[name] = abs(value - other) / scale if scale > 0 else 0.0
    return deviations
