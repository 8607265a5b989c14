"""
Configuration module for the DAS generalization experiments.
"""
import os

from dotenv import load_dotenv

from .base import Config, DevelopmentConfig, ProductionConfig, TestingConfig
from .experiment import (
    ExperimentFileError,
    ExperimentSettings,
    HarnessSettings,
    PipelineSettings,
    SynthSettings,
    apply_overrides,
    default_settings,
    load_experiment
)


def create_config(env: str = None, dotenv: bool = True) -> Config:
    """
    Create configuration instance based on environment.

    Args:
        env: Environment name ('development', 'production', 'testing');
            read from DASGEN_ENV when omitted
        dotenv: Load a .env file from the working directory first

    Returns:
        Configuration instance

    Raises:
        ValueError: If environment is unknown
    """
    if dotenv:
        load_dotenv()
    if env is None:
        env = os.environ.get('DASGEN_ENV', 'development')

    config_map = {
        'development': DevelopmentConfig,
        'production': ProductionConfig,
        'testing': TestingConfig
    }

    if env not in config_map:
        raise ValueError(f"Unknown environment: {env}")

    return config_map[env]()


__all__ = [
    'Config',
    'DevelopmentConfig',
    'ProductionConfig',
    'TestingConfig',
    'create_config',
    'ExperimentFileError',
    'ExperimentSettings',
    'HarnessSettings',
    'PipelineSettings',
    'SynthSettings',
    'apply_overrides',
    'default_settings',
    'load_experiment'
]
