import logging
from typing import Optional

import numpy as np

from pedcross.autodiff import Tensor, ops
from pedcross.errors import ShapeError
from pedcross.layers.params import BatchNormState, DenseParams

logger = logging.getLogger(__name__)


def dense(x: Tensor, p: DenseParams, activation: str = "identity") -> Tensor:
    """activation(x W + b) over the last axis; leading axes are kept"""
    in_features, out_features = p.weight.shape
    if x.shape[-1] != in_features:
        raise ShapeError(f"dense: input has {x.shape[-1]} features, layer expects {in_features} (input {x.shape})")
    lead = x.shape[:-1]
    flat = x if x.ndim == 2 else ops.reshape(x, (-1, in_features))
    out = ops.matmul(flat, p.weight) + p.bias
    if x.ndim != 2:
        out = ops.reshape(out, lead + (out_features,))
    return ops.activation(activation, out)


def dropout(x: Tensor, rate: float, mode: str, rng: Optional[np.random.Generator] = None) -> Tensor:
    """Inverted dropout; identity in eval mode or at rate 0"""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    if mode not in ("train", "eval"):
        raise ValueError(f"dropout mode must be 'train' or 'eval', got {mode!r}")
    if mode == "eval" or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in train mode needs a random generator")
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * keep


def batch_norm(x: Tensor, state: BatchNormState, mode: str) -> Tensor:
    """
    Per-channel normalization over every axis but axis 1.

    Train mode normalizes with batch statistics and folds them into the
    running estimates; eval mode uses the running estimates only.
    """
    if x.ndim < 2:
        raise ShapeError(f"batch_norm: expects (B, C, ...), got {x.shape}")
    channels = state.gamma.shape[0]
    if x.shape[1] != channels:
        raise ShapeError(f"batch_norm: input has {x.shape[1]} channels, state holds {channels}")
    axes = (0,) + tuple(range(2, x.ndim))
    bshape = (1, channels) + (1,) * (x.ndim - 2)

    if mode == "train":
        mean = ops.reduce_mean(x, axis=axes, keepdims=True)
        centered = x - mean
        var = ops.reduce_mean(centered * centered, axis=axes, keepdims=True)
        normalized = centered / ops.sqrt(var + state.epsilon)
        m = state.momentum
        state.running_mean = m * state.running_mean + (1.0 - m) * mean.data.reshape(channels)
        state.running_var = m * state.running_var + (1.0 - m) * var.data.reshape(channels)
    elif mode == "eval":
        mean = state.running_mean.reshape(bshape)
        std = np.sqrt(state.running_var.reshape(bshape) + state.epsilon)
        normalized = (x - mean) / std
    else:
        raise ValueError(f"Unknown mode '{mode}', expected 'train' or 'eval'")

    return normalized * ops.reshape(state.gamma, bshape) + ops.reshape(state.beta, bshape)
