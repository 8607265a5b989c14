"""
Ordered parameter container for SR-Net models.
"""
from collections import OrderedDict
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .architecture import ArchitectureConfig
from .exceptions import DescriptorMismatchError


class ModelParams:
    """
    Named float64 tensors in architecture order, plus the architecture itself.

    Two instances are element-wise combinable exactly when their descriptors
    match. Instances are treated as values: operations return new objects.
    """

    def __init__(self, arch: ArchitectureConfig, tensors: Dict[str, np.ndarray]):
        expected = arch.param_shapes()
        if [name for name, _ in expected] != list(tensors):
            raise DescriptorMismatchError("Tensor names do not follow the architecture order")
        for name, shape in expected:
            if tuple(tensors[name].shape) != shape:
                raise DescriptorMismatchError(f"{name} has shape {tensors[name].shape}, expected {shape}")
        self.arch = arch
        self._tensors = OrderedDict((name, np.asarray(tensors[name], dtype=np.float64)) for name, _ in expected)

    @property
    def descriptor(self) -> str:
        return self.arch.describe()

    @property
    def parameter_count(self) -> int:
        return sum(t.size for t in self._tensors.values())

    @property
    def names(self) -> List[str]:
        return list(self._tensors)

    def __getitem__(self, name: str) -> np.ndarray:
        return self._tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self._tensors.items())

    def flatten(self) -> np.ndarray:
        """All tensors concatenated in architecture order."""
        return np.concatenate([t.ravel() for t in self._tensors.values()])

    @classmethod
    def from_vector(cls, arch: ArchitectureConfig, vector: np.ndarray) -> 'ModelParams':
        vector = np.asarray(vector, dtype=np.float64)
        shapes = arch.param_shapes()
        total = sum(int(np.prod(shape)) for _, shape in shapes)
        if vector.shape != (total,):
            raise DescriptorMismatchError(f"Vector of length {vector.size} does not fit {total} parameters")
        tensors = OrderedDict()
        offset = 0
        for name, shape in shapes:
            size = int(np.prod(shape))
            tensors[name] = vector[offset:offset + size].reshape(shape).copy()
            offset += size
        return cls(arch, tensors)

    @classmethod
    def zeros(cls, arch: ArchitectureConfig) -> 'ModelParams':
        return cls(arch, OrderedDict((name, np.zeros(shape)) for name, shape in arch.param_shapes()))

    def copy(self) -> 'ModelParams':
        return ModelParams(self.arch, OrderedDict((n, t.copy()) for n, t in self._tensors.items()))

    def with_tensor(self, name: str, value: np.ndarray) -> 'ModelParams':
        updated = OrderedDict((n, t.copy()) for n, t in self._tensors.items())
        updated[name] = np.asarray(value, dtype=np.float64).copy()
        return ModelParams(self.arch, updated)

    def require_compatible(self, other: 'ModelParams') -> None:
        if self.descriptor != other.descriptor:
            raise DescriptorMismatchError("Parameter sets belong to different architectures")

    def equals(self, other: 'ModelParams') -> bool:
        """Bit-for-bit equality of descriptor and every tensor."""
        return self.descriptor == other.descriptor and all(
            np.array_equal(a, b) for a, b in zip(self._tensors.values(), other._tensors.values())
        )

    def __repr__(self) -> str:
        return f"ModelParams(layers={self.arch.trainable_layers}, parameters={self.parameter_count})"


def init_params(arch: ArchitectureConfig, rng: Optional[np.random.Generator] = None,
                seed: Optional[int] = None) -> ModelParams:
    """
    He-normal weights and zero biases.

    Args:
        arch: Architecture to instantiate
        rng: Random stream (takes precedence over `seed`)
        seed: Seed for a fresh stream
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    tensors = OrderedDict()
    for name, shape in arch.param_shapes():
        if name.endswith('.b'):
            tensors[name] = np.zeros(shape)
            continue
        fan_in = int(np.prod(shape[1:])) if len(shape) > 1 else shape[0]
        tensors[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
    return ModelParams(arch, tensors)
