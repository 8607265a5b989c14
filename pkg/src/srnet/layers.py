"""
Batched layer primitives with explicit backward passes.

Feature maps are (N, C, H, W) float64 arrays.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


@dataclass(frozen=True, eq=False)
class ConvCache:
    windows: np.ndarray
    input_shape: Tuple[int, ...]
    stride: int
    padding: int


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int = 1,
                   padding: int = 0) -> Tuple[np.ndarray, ConvCache]:
    """
    Cross-correlation of `x` (N, C, H, W) with kernels `w` (F, C, k, k) plus bias.

    Returns:
        (output of shape (N, F, Ho, Wo), cache for the backward pass)
    """
    k = w.shape[-1]
    padded = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(padded, (k, k), axis=(2, 3))[:, :, ::stride, ::stride]
    out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + b[None, :, None, None]
    return np.ascontiguousarray(out), ConvCache(windows, x.shape, stride, padding)


def conv2d_backward(dout: np.ndarray, w: np.ndarray,
                    cache: ConvCache) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gradients of a convolution.

    Returns:
        (d_input, d_kernels, d_bias)
    """
    n, c, height, width = cache.input_shape
    k = w.shape[-1]
    s, p = cache.stride, cache.padding
    out_h, out_w = dout.shape[2], dout.shape[3]

    db = dout.sum(axis=(0, 2, 3))
    dw = np.tensordot(dout, cache.windows, axes=([0, 2, 3], [0, 2, 3]))

    dpadded = np.zeros((n, c, height + 2 * p, width + 2 * p))
    for i in range(k):
        for j in range(k):
            contribution = np.tensordot(dout, w[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)
            dpadded[:, :, i:i + s * (out_h - 1) + 1:s, j:j + s * (out_w - 1) + 1:s] += contribution
    dx = dpadded[:, :, p:p + height, p:p + width]
    return np.ascontiguousarray(dx), dw, db


def relu_forward(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mask = z > 0
    return z * mask, mask


def relu_backward(dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dout * mask


def avg_pool_forward(x: np.ndarray, size: Tuple[int, int]) -> np.ndarray:
    """Non-overlapping average pooling; trailing rows/columns that do not fill a cell are dropped."""
    ph, pw = size
    if (ph, pw) == (1, 1):
        return x
    n, c, height, width = x.shape
    out_h, out_w = height // ph, width // pw
    cropped = x[:, :, :out_h * ph, :out_w * pw]
    return cropped.reshape(n, c, out_h, ph, out_w, pw).mean(axis=(3, 5))


def avg_pool_backward(dout: np.ndarray, input_shape: Tuple[int, ...], size: Tuple[int, int]) -> np.ndarray:
    ph, pw = size
    if (ph, pw) == (1, 1):
        return dout
    spread = np.repeat(np.repeat(dout, ph, axis=2), pw, axis=3) / (ph * pw)
    dx = np.zeros(input_shape)
    dx[:, :, :spread.shape[2], :spread.shape[3]] = spread
    return dx


def pad_channels_forward(x: np.ndarray, channels: int) -> np.ndarray:
    extra = channels - x.shape[1]
    if extra == 0:
        return x
    return np.concatenate([x, np.zeros((x.shape[0], extra) + x.shape[2:])], axis=1)


def pad_channels_backward(dout: np.ndarray, channels: int) -> np.ndarray:
    return dout[:, :channels]
