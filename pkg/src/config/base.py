"""
Environment configuration classes for the DAS generalization experiments.
"""
import logging
import os
from pathlib import Path
from typing import Dict, Optional, Tuple


LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class Config:
    """
    Base configuration class.

    Scale presets live in class attributes; run-time settings are read from the
    environment when the instance is created.
    """

    ENV = 'production'
    DEBUG = False
    TESTING = False

    # Samples per node before splitting
    DATASET_SIZES: Dict[str, int] = {'red': 1085, 'ca': 122, 'cb': 126}
    SPLIT_RATIOS: Dict[str, float] = {'red': 0.94, 'ca': 0.8, 'cb': 0.8}
    WINDOW_SHAPE: Tuple[int, int] = (64, 512)
    PROFILE_SET = 'reference'
    DEFAULT_SEEDS: Tuple[int, ...] = (0, 1, 2, 3, 4)

    def __init__(self):
        """Read environment overrides and validate them."""
        self.RUN_DIR = Path(os.environ.get('DASGEN_RUN_DIR', 'runs'))
        self.LOG_LEVEL = os.environ.get('DASGEN_LOG_LEVEL', 'INFO').upper()
        self.WORKERS = self.parse_workers(os.environ.get('DASGEN_WORKERS', '1'))
        self.SEEDS = self.parse_seeds(os.environ.get('DASGEN_SEEDS')) or tuple(self.DEFAULT_SEEDS)
        self.validate()

    def validate(self):
        """Validate the effective settings."""
        if self.LOG_LEVEL not in LOG_LEVELS:
            raise ValueError(f"Invalid DASGEN_LOG_LEVEL: {self.LOG_LEVEL}")
        if set(self.DATASET_SIZES) != set(self.SPLIT_RATIOS):
            raise ValueError("Dataset sizes and split ratios must name the same nodes")
        height, width = self.WINDOW_SHAPE
        if height < 1 or width < 1:
            raise ValueError(f"Invalid window shape: {self.WINDOW_SHAPE}")

    @staticmethod
    def parse_workers(value: str) -> int:
        """Parse a positive worker count."""
        try:
            workers = int(value)
        except (TypeError, ValueError):
            raise ValueError(f"Invalid DASGEN_WORKERS: {value!r}")
        if workers < 1:
            raise ValueError(f"DASGEN_WORKERS must be >= 1, got {workers}")
        return workers

    @staticmethod
    def parse_seeds(value: Optional[str]) -> Tuple[int, ...]:
        """Parse a comma-separated seed list; an unset or blank value gives an empty tuple."""
        if value is None or not value.strip():
            return ()
        try:
            return tuple(int(part) for part in value.split(',') if part.strip())
        except ValueError:
            raise ValueError(f"Invalid DASGEN_SEEDS: {value!r}")

    def get_log_level(self) -> int:
        return getattr(logging, self.LOG_LEVEL)

    def to_dict(self) -> dict:
        """Preset values consumed by the experiment layer."""
        return {
            'env': self.ENV,
            'dataset_sizes': dict(self.DATASET_SIZES),
            'split_ratios': dict(self.SPLIT_RATIOS),
            'window_shape': list(self.WINDOW_SHAPE),
            'profile_set': self.PROFILE_SET,
            'seeds': list(self.SEEDS),
            'workers': self.WORKERS,
            'run_dir': str(self.RUN_DIR),
        }


class DevelopmentConfig(Config):
    """Development configuration: desk-scale datasets."""

    ENV = 'development'
    DEBUG = True

    DATASET_SIZES = {'red': 200, 'ca': 60, 'cb': 60}


class ProductionConfig(Config):
    """Production configuration: full-size datasets over five seeds."""

    ENV = 'production'


class TestingConfig(Config):
    """Testing configuration: tiny windows on the fast profiles, single seed."""

    ENV = 'testing'
    TESTING = True

    DATASET_SIZES = {'red': 40, 'ca': 24, 'cb': 24}
    SPLIT_RATIOS = {'red': 0.75, 'ca': 0.75, 'cb': 0.75}
    WINDOW_SHAPE = (16, 128)
    PROFILE_SET = 'fast'
    DEFAULT_SEEDS = (0,)
