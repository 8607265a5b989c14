"""
Test utilities and independent oracles.
"""
import math
from typing import Callable, List, Sequence

import numpy as np

from src.models import LabeledSample, PhaseWindow
from src.srnet import ModelParams, forward


def make_sample(data: np.ndarray, label: int, node_id: str = 'test') -> LabeledSample:
    """Labeled sample around a raw array."""
    return LabeledSample(window=PhaseWindow(np.asarray(data, dtype=np.float64), 0, 0.0, node_id), label=label)


def constant_samples(values: Sequence[float], labels: Sequence[int], shape=(16, 128)) -> List[LabeledSample]:
    return [make_sample(np.full(shape, value), label) for value, label in zip(values, labels)]


def naive_conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int = 1, padding: int = 0) -> np.ndarray:
    """Nested-loop cross-correlation of one (C, H, W) input with (F, C, k, k) kernels."""
    channels, height, width = x.shape
    filters, _, k, _ = w.shape
    padded = np.zeros((channels, height + 2 * padding, width + 2 * padding))
    padded[:, padding:padding + height, padding:padding + width] = x
    out_h = (height + 2 * padding - k) // stride + 1
    out_w = (width + 2 * padding - k) // stride + 1
    out = np.zeros((filters, out_h, out_w))
    for f in range(filters):
        for i in range(out_h):
            for j in range(out_w):
                total = b[f]
                for c in range(channels):
                    for u in range(k):
                        for v in range(k):
                            total += padded[c, i * stride + u, j * stride + v] * w[f, c, u, v]
                out[f, i, j] = total
    return out


def fsum_mean(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Element-wise mean computed with extended-precision summation."""
    stacked = np.stack([np.asarray(v, dtype=np.float64) for v in vectors])
    return np.array([math.fsum(column) / len(vectors) for column in stacked.T])


def confusion_accuracy(params: ModelParams, samples: Sequence[LabeledSample]) -> float:
    """Accuracy from a per-sample confusion matrix, one forward pass each."""
    tp = tn = fp = fn = 0
    for sample in samples:
        predicted = 1 if forward(params, sample.window) >= 0.5 else 0
        if predicted == 1 and sample.label == 1:
            tp += 1
        elif predicted == 0 and sample.label == 0:
            tn += 1
        elif predicted == 1:
            fp += 1
        else:
            fn += 1
    return (tp + tn) / (tp + tn + fp + fn)


def central_difference(f: Callable[[np.ndarray], float], vector: np.ndarray, index: int,
                       step: float = 1e-5) -> float:
    """Central finite difference of f along one coordinate."""
    plus = vector.copy()
    minus = vector.copy()
    plus[index] += step
    minus[index] -= step
    return (f(plus) - f(minus)) / (2 * step)
