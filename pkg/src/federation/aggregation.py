"""
Federated averaging of node models.
"""
from typing import Optional, Sequence

import numpy as np

from src.srnet import ModelParams
from .exceptions import FederationConfigError


WEIGHT_TOLERANCE = 1e-9


def aggregate(models: Sequence[ModelParams], weights: Optional[Sequence[float]] = None) -> ModelParams:
    """
    Element-wise average of node models.

    Summation runs in list order (callers pass models by ascending node id).
    Without weights every model counts 1/M; a weight vector must be
    non-negative and sum to 1. The result is clipped to the element-wise
    [min, max] of the inputs, which keeps averaging of identical models exact.

    Args:
        models: Node models sharing one architecture
        weights: Optional per-model weights

    Returns:
        Aggregated ModelParams

    Raises:
        FederationConfigError: On an empty list or invalid weights
        DescriptorMismatchError: If architectures differ
    """
    if not models:
        raise FederationConfigError("Nothing to aggregate")
    first = models[0]
    for other in models[1:]:
        first.require_compatible(other)

    vectors = [model.flatten() for model in models]
    if weights is None:
        total = vectors[0].copy()
        for vector in vectors[1:]:
            total += vector
        mean = total / len(vectors)
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(models),):
            raise FederationConfigError(f"Expected {len(models)} weights, got {weights.size}")
        if np.any(weights < 0) or abs(float(weights.sum()) - 1.0) > WEIGHT_TOLERANCE:
            raise FederationConfigError(f"Weights must be non-negative and sum to 1, got {weights.tolist()}")
        mean = weights[0] * vectors[0]
        for weight, vector in zip(weights[1:], vectors[1:]):
            mean += weight * vector

    lower = np.minimum.reduce(vectors)
    upper = np.maximum.reduce(vectors)
    return ModelParams.from_vector(first.arch, np.clip(mean, lower, upper))
