"""
SR-Net forward pass, analytic backward pass, loss and prediction.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import expit, logit

from src.models import LabeledSample, PhaseWindow
from .architecture import CONVS_PER_BLOCK, TRANSITION_POOL
from .exceptions import EmptyDatasetError, ShapeMismatchError
from .layers import (
    ConvCache, avg_pool_backward, avg_pool_forward, conv2d_backward, conv2d_forward,
    pad_channels_backward, pad_channels_forward, relu_backward, relu_forward
)
from .params import ModelParams


logger = logging.getLogger(__name__)


PROBABILITY_CLAMP = 1e-7
_LOGIT_CLAMP = float(logit(1.0 - PROBABILITY_CLAMP))


@dataclass(eq=False)
class ForwardCache:
    """Intermediate values of one batched forward pass."""
    input_shape: Tuple[int, ...]
    pooled_shape: Tuple[int, ...]
    stem: ConvCache = None
    stem_mask: np.ndarray = None
    convs: List[List[Tuple[ConvCache, np.ndarray]]] = field(default_factory=list)
    transition_shapes: List[Tuple[Tuple[int, ...], int]] = field(default_factory=list)
    features_shape: Tuple[int, ...] = None
    pooled_features: np.ndarray = None
    logits: np.ndarray = None

    @property
    def masks(self) -> List[np.ndarray]:
        """Every ReLU activation pattern, in forward order."""
        patterns = [self.stem_mask]
        for block in self.convs:
            patterns.extend(mask for _, mask in block)
        return patterns


def stack_windows(samples: Sequence[LabeledSample]) -> Tuple[np.ndarray, np.ndarray]:
    """Batch samples into (N, H, W) inputs and (N,) float labels."""
    items = [samples[i] for i in range(len(samples))]
    inputs = np.stack([sample.window.data for sample in items]).astype(np.float64)
    labels = np.array([sample.label for sample in items], dtype=np.float64)
    return inputs, labels


def _check_input(params: ModelParams, inputs: np.ndarray) -> None:
    expected = tuple(params.arch.input_shape)
    if inputs.ndim != 3 or tuple(inputs.shape[1:]) != expected:
        raise ShapeMismatchError(f"Expected windows of shape {expected}, got {inputs.shape[1:]}")


def forward_batch(params: ModelParams, inputs: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    Logits for a batch of windows.

    Args:
        params: Model parameters
        inputs: (N, H, W) phase windows

    Returns:
        (logits of shape (N,), cache for `backward_batch`)

    Raises:
        ShapeMismatchError: If the windows do not match the architecture
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    _check_input(params, inputs)
    arch = params.arch

    x = inputs[:, None, :, :]
    a = avg_pool_forward(x, arch.input_pool)
    cache = ForwardCache(input_shape=x.shape, pooled_shape=a.shape)

    z, cache.stem = conv2d_forward(a, params['stem.w'], params['stem.b'], arch.stem_stride, arch.padding)
    a, cache.stem_mask = relu_forward(z)

    for s, (channels, blocks) in enumerate(arch.stages):
        if s > 0:
            cache.transition_shapes.append((a.shape, a.shape[1]))
            a = pad_channels_forward(avg_pool_forward(a, TRANSITION_POOL), channels)
        for b in range(blocks):
            block_input = a
            layers = []
            h = a
            for i in range(1, CONVS_PER_BLOCK + 1):
                prefix = f"stage{s}.block{b}.conv{i}"
                z, conv_cache = conv2d_forward(h, params[f"{prefix}.w"], params[f"{prefix}.b"], 1, arch.padding)
                h, mask = relu_forward(z)
                layers.append((conv_cache, mask))
            cache.convs.append(layers)
            a = h + block_input

    cache.features_shape = a.shape
    cache.pooled_features = a.mean(axis=(2, 3))
    cache.logits = cache.pooled_features @ params['head.w'] + params['head.b'][0]
    return cache.logits, cache


def bce_with_logits(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-sample binary cross-entropy with the probability clamped to [1e-7, 1 - 1e-7]."""
    clamped = np.clip(logits, -_LOGIT_CLAMP, _LOGIT_CLAMP)
    return labels * np.logaddexp(0.0, -clamped) + (1.0 - labels) * np.logaddexp(0.0, clamped)


def loss(y_hat: float, y: int) -> float:
    """Binary cross-entropy of one prediction."""
    p = min(max(float(y_hat), PROBABILITY_CLAMP), 1.0 - PROBABILITY_CLAMP)
    return float(-(y * np.log(p) + (1 - y) * np.log(1.0 - p)))


def backward_batch(params: ModelParams, cache: ForwardCache, labels: np.ndarray) -> Tuple[float, ModelParams]:
    """
    Mean BCE over the batch and its exact gradient.

    Where the probability sits on a clamp bound the loss is flat, so the
    logit gradient there is zero.
    """
    arch = params.arch
    labels = np.asarray(labels, dtype=np.float64)
    n = labels.size
    logits = cache.logits
    mean_loss = float(bce_with_logits(logits, labels).mean())

    inside = np.abs(logits) <= _LOGIT_CLAMP
    dlogits = (expit(logits) - labels) * inside / n

    grads = OrderedDict()
    grads['head.w'] = cache.pooled_features.T @ dlogits
    grads['head.b'] = np.array([dlogits.sum()])

    _, channels, height, width = cache.features_shape
    da = np.broadcast_to(
        (np.outer(dlogits, params['head.w']) / (height * width))[:, :, None, None],
        cache.features_shape
    ).copy()

    conv_grads = {}
    block_index = len(cache.convs)
    transition_index = len(cache.transition_shapes)
    for s in range(len(arch.stages) - 1, -1, -1):
        channels, blocks = arch.stages[s]
        for b in range(blocks - 1, -1, -1):
            block_index -= 1
            layers = cache.convs[block_index]
            dh = da
            for i in range(CONVS_PER_BLOCK, 0, -1):
                prefix = f"stage{s}.block{b}.conv{i}"
                conv_cache, mask = layers[i - 1]
                dz = relu_backward(dh, mask)
                dh, dw, db = conv2d_backward(dz, params[f"{prefix}.w"], conv_cache)
                conv_grads[f"{prefix}.w"] = dw
                conv_grads[f"{prefix}.b"] = db
            da = dh + da
        if s > 0:
            transition_index -= 1
            pre_shape, pre_channels = cache.transition_shapes[transition_index]
            da = avg_pool_backward(pad_channels_backward(da, pre_channels), pre_shape, TRANSITION_POOL)

    dz = relu_backward(da, cache.stem_mask)
    _, dw, db = conv2d_backward(dz, params['stem.w'], cache.stem)
    conv_grads['stem.w'] = dw
    conv_grads['stem.b'] = db

    ordered = OrderedDict((name, conv_grads[name] if name in conv_grads else grads[name])
                          for name, _ in arch.param_shapes())
    return mean_loss, ModelParams(arch, ordered)


def forward(params: ModelParams, window: PhaseWindow) -> float:
    """Probability that `window` shows cycling."""
    logits, _ = forward_batch(params, np.asarray(window.data)[None, :, :])
    return float(expit(logits[0]))


def backward(params: ModelParams, window: PhaseWindow, y: int) -> ModelParams:
    """Gradient of loss(forward(params, window), y) with respect to every parameter."""
    _, cache = forward_batch(params, np.asarray(window.data)[None, :, :])
    _, grads = backward_batch(params, cache, np.array([float(y)]))
    return grads


def decide(probabilities) -> np.ndarray:
    """Decision rule: probability 0.5 and above is cycling."""
    return (np.asarray(probabilities) >= 0.5).astype(np.int64)


def predict(params: ModelParams, window: PhaseWindow) -> int:
    return int(decide(forward(params, window)))


@dataclass(frozen=True)
class Score:
    accuracy: float
    loss: float
    count: int


def score(params: ModelParams, samples: Sequence[LabeledSample], batch_size: int = 64) -> Score:
    """
    Accuracy and mean BCE over a labeled set.

    Raises:
        EmptyDatasetError: If `samples` is empty
    """
    n = len(samples)
    if n == 0:
        raise EmptyDatasetError("Cannot score an empty dataset")
    correct = 0
    total_loss = 0.0
    for start in range(0, n, batch_size):
        batch = [samples[i] for i in range(start, min(start + batch_size, n))]
        inputs, labels = stack_windows(batch)
        logits, _ = forward_batch(params, inputs)
        correct += int(np.sum(decide(expit(logits)) == labels.astype(np.int64)))
        total_loss += float(bce_with_logits(logits, labels).sum())
    return Score(accuracy=correct / n, loss=total_loss / n, count=n)
