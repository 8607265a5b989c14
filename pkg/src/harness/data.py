"""
Per-seed node datasets for the harness.
"""
import logging
from typing import Dict, List, Sequence

import numpy as np

from src.config import ExperimentSettings
from src.models import LabeledSample, NodeProfile
from src.pipeline import DatasetSplit, TooFewSamplesError, extract_samples, split
from src.synth import fast_profiles, profiles_by_id, reference_profiles, synthesize_dataset, synthesize_recording
from .exceptions import ExperimentConfigError


logger = logging.getLogger(__name__)


def node_profiles(settings: ExperimentSettings) -> Dict[str, NodeProfile]:
    """Profiles of the configured profile set keyed by node id."""
    if settings.synth.profile_set == 'fast':
        return profiles_by_id(fast_profiles())
    return profiles_by_id(reference_profiles())


def data_rng(profile: NodeProfile, seed: int) -> np.random.Generator:
    """Generator of one node's data on one run seed."""
    return np.random.default_rng([profile.seed, seed])


def node_samples(profile: NodeProfile, settings: ExperimentSettings, seed: int) -> List[LabeledSample]:
    """
    Labeled samples of one node.

    With the 'recordings' source a continuous recording is rendered and the
    samples come out of synchronization, window sampling and cleaning, so the
    count can fall below the configured size.
    """
    try:
        size = settings.synth.dataset_sizes[profile.node_id]
    except KeyError:
        raise ExperimentConfigError(f"No dataset size configured for node {profile.node_id}", field='synth')
    shape = tuple(settings.synth.window_shape)
    rng = data_rng(profile, seed)

    if settings.pipeline.source == 'windows':
        return synthesize_dataset(profile, size, settings.synth.class_balance, rng=rng, shape=shape)

    synthetic = synthesize_recording(profile, size, shape=shape, class_balance=settings.synth.class_balance, rng=rng)
    x_th = settings.pipeline.threshold_multiple * profile.noise_std
    return extract_samples(synthetic.recording, synthetic.tracks, shape, x_th).samples


def node_splits(nodes: Sequence[str], settings: ExperimentSettings, seed: int) -> Dict[str, DatasetSplit]:
    """
    Train/test split of every listed node for one seed.

    Raises:
        ExperimentConfigError: If a node has no split ratio configured
        TooFewSamplesError: If a node ends up with fewer than two samples
    """
    profiles = node_profiles(settings)
    splits = {}
    for node in nodes:
        if node not in settings.pipeline.split_ratios:
            raise ExperimentConfigError(f"No split ratio configured for node {node}", field='pipeline')
        samples = node_samples(profiles[node], settings, seed)
        if len(samples) < 2:
            raise TooFewSamplesError(f"Node {node} produced {len(samples)} usable samples")
        splits[node] = split(samples, settings.pipeline.split_ratios[node], seed,
                             stratified=settings.pipeline.stratified)
    return splits
