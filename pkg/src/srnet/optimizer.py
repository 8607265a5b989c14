"""
Optimizers operating on flattened ModelParams.
"""
from typing import Optional

import numpy as np

from .params import ModelParams


class GradientDescent:
    """Plain gradient descent: w <- w - lr * g."""

    def __init__(self, learning_rate: float):
        if learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {learning_rate}")
        self.learning_rate = learning_rate

    def step(self, params: ModelParams, grads: ModelParams) -> ModelParams:
        params.require_compatible(grads)
        if self.learning_rate == 0:
            return params.copy()
        return ModelParams.from_vector(params.arch, params.flatten() - self.learning_rate * grads.flatten())


class Adam:
    """
    Adam with bias-corrected moment estimates.

    Moments live on the flattened parameter vector, so one instance follows
    exactly one parameter trajectory.
    """

    def __init__(self, learning_rate: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 epsilon: float = 1e-8):
        if learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {learning_rate}")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ValueError(f"Moment decays must be in [0, 1), got {beta1}, {beta2}")
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.iteration = 0
        self._moment1: Optional[np.ndarray] = None
        self._moment2: Optional[np.ndarray] = None

    def step(self, params: ModelParams, grads: ModelParams) -> ModelParams:
        params.require_compatible(grads)
        if self.learning_rate == 0:
            return params.copy()
        g = grads.flatten()
        if self._moment1 is None:
            self._moment1 = np.zeros_like(g)
            self._moment2 = np.zeros_like(g)
        self.iteration += 1

        self._moment1 = self.beta1 * self._moment1 + (1 - self.beta1) * g
        self._moment2 = self.beta2 * self._moment2 + (1 - self.beta2) * np.square(g)
        moment1_hat = self._moment1 / (1 - self.beta1 ** self.iteration)
        moment2_hat = self._moment2 / (1 - self.beta2 ** self.iteration)

        update = self.learning_rate * moment1_hat / (np.sqrt(moment2_hat) + self.epsilon)
        return ModelParams.from_vector(params.arch, params.flatten() - update)
