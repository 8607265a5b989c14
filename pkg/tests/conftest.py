"""
Test configuration and fixtures for the DAS generalization framework.
"""
import os
from unittest.mock import patch

import numpy as np
import pytest

from src.config import TestingConfig, apply_overrides, default_settings
from src.models import LabeledSample, PhaseWindow
from src.srnet import desk_preset, init_params
from src.synth import fast_profiles, synthesize_dataset


TINY_SHAPE = (16, 128)

FAST_OVERRIDES = {
    'train': {'epochs': 2, 'batch_size': 8},
    'federation': {'rounds': 2, 'local_epochs': 2},
    'meta': {'iterations': 3, 'inner_steps': 2, 'support_size': 4, 'query_size': 4, 'shot_budget': 4},
    'harness': {'shots': 2, 'sweep_seeds': 2},
}


@pytest.fixture
def clean_env():
    """Environment without DASGEN_* variables."""
    env = {key: value for key, value in os.environ.items() if not key.startswith('DASGEN_')}
    with patch.dict(os.environ, env, clear=True):
        yield


@pytest.fixture
def profiles():
    """Fast red, ca and cb profiles."""
    return fast_profiles()


@pytest.fixture
def red_profile(profiles):
    return profiles[0]


@pytest.fixture
def ca_profile(profiles):
    return profiles[1]


@pytest.fixture
def tiny_arch():
    """Ten-layer desk preset on 16 x 128 windows."""
    return desk_preset(TINY_SHAPE)


@pytest.fixture
def tiny_params(tiny_arch):
    return init_params(tiny_arch, seed=7)


@pytest.fixture
def red_samples(red_profile):
    return synthesize_dataset(red_profile, 24, rng=np.random.default_rng(0), shape=TINY_SHAPE)


@pytest.fixture
def ca_samples(ca_profile):
    return synthesize_dataset(ca_profile, 20, rng=np.random.default_rng(1), shape=TINY_SHAPE)


@pytest.fixture
def random_samples():
    """Twelve random windows with alternating labels."""
    rng = np.random.default_rng(3)
    return [
        LabeledSample(window=PhaseWindow(rng.normal(size=TINY_SHAPE), 0, 0.0, 'random'), label=i % 2)
        for i in range(12)
    ]


@pytest.fixture
def testing_settings(clean_env):
    """Testing preset with very short training schedules."""
    return apply_overrides(default_settings(TestingConfig()), FAST_OVERRIDES)
