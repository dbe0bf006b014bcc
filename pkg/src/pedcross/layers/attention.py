"""
Attention layers: CBAM and SE gates over feature maps, additive attention over
time steps and over modality vectors.
"""
import logging
from typing import Sequence

from pedcross.autodiff import Tensor, conv2d, ops
from pedcross.errors import ShapeError
from pedcross.layers.dense import dense
from pedcross.layers.params import CBAMParams, DenseParams, ModalityAttentionParams, SEParams, TemporalAttentionParams

logger = logging.getLogger(__name__)


def _check_channels(op: str, x: Tensor, expected: int) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{op}: expects (B, C, H, W), got {x.shape}")
    if x.shape[1] != expected:
        raise ShapeError(f"{op}: input has {x.shape[1]} channels, parameters expect {expected}")


def _mlp(v: Tensor, hidden: DenseParams, out: DenseParams) -> Tensor:
    return dense(dense(v, hidden, "relu"), out)


def channel_gate(x: Tensor, p: CBAMParams) -> Tensor:
    """sigmoid(MLP(avg) + MLP(max)) as a (B, C, 1, 1) gate"""
    batch, channels, height, width = x.shape
    avg = ops.global_avg_pool(x)
    peak = ops.reduce_max(ops.reshape(x, (batch, channels, height * width)), axis=-1)
    gate = ops.sigmoid(_mlp(avg, p.mlp_hidden, p.mlp_out) + _mlp(peak, p.mlp_hidden, p.mlp_out))
    return ops.reshape(gate, (batch, channels, 1, 1))


def spatial_gate(x: Tensor, p: CBAMParams) -> Tensor:
    """sigmoid(conv7x7([mean_c, max_c])) as a (B, 1, H, W) gate"""
    pooled = ops.concat(
        [ops.reduce_mean(x, axis=1, keepdims=True), ops.reduce_max(x, axis=1, keepdims=True)],
        axis=1,
    )
    return ops.sigmoid(conv2d(pooled, p.spatial.weight, p.spatial.bias, p.spatial.dilation))


def cbam(x: Tensor, p: CBAMParams) -> Tensor:
    _check_channels("cbam", x, p.mlp_hidden.weight.shape[0])
    refined = x * channel_gate(x, p)
    return refined * spatial_gate(refined, p)


def se_block(x: Tensor, p: SEParams) -> Tensor:
    _check_channels("se_block", x, p.squeeze.weight.shape[0])
    batch, channels = x.shape[:2]
    scale = ops.sigmoid(_mlp(ops.global_avg_pool(x), p.squeeze, p.excite))
    return x * ops.reshape(scale, (batch, channels, 1, 1))


def temporal_weights(states: Tensor, p: TemporalAttentionParams) -> Tensor:
    """Softmax over time of v . tanh(W1 h_t + W2 h_last + b); returns (B, T)"""
    if states.ndim != 3:
        raise ShapeError(f"temporal_attention: expects (B, T, H), got {states.shape}")
    batch, steps, hidden = states.shape
    if steps == 0:
        raise ShapeError("temporal_attention: empty sequence")
    if hidden != p.w_state.shape[0]:
        raise ShapeError(f"temporal_attention: states have {hidden} features, parameters expect {p.w_state.shape[0]}")
    width = p.w_state.shape[1]

    per_step = ops.reshape(ops.matmul(ops.reshape(states, (batch * steps, hidden)), p.w_state), (batch, steps, width))
    last = ops.slice_(states, (slice(None), steps - 1))
    context = ops.reshape(ops.matmul(last, p.w_last), (batch, 1, width))
    energy = ops.tanh(per_step + context + p.bias)
    scores = ops.reshape(ops.matmul(ops.reshape(energy, (batch * steps, width)), p.score), (batch, steps))
    return ops.softmax(scores, axis=1)


def temporal_attention(states: Tensor, p: TemporalAttentionParams) -> Tensor:
    """Attention-weighted sum of the (B, T, H) states, conditioned on the last step"""
    batch, steps, hidden = states.shape
    alpha = temporal_weights(states, p)
    return ops.reduce_sum(ops.reshape(alpha, (batch, steps, 1)) * states, axis=1)


def modality_weights(stacked: Tensor, p: ModalityAttentionParams) -> Tensor:
    batch, count, hidden = stacked.shape
    if hidden != p.weight.shape[0]:
        raise ShapeError(f"modality_attention: vectors have {hidden} features, parameters expect {p.weight.shape[0]}")
    width = p.weight.shape[1]
    energy = ops.tanh(ops.matmul(ops.reshape(stacked, (batch * count, hidden)), p.weight) + p.bias)
    scores = ops.reshape(ops.matmul(energy, p.score), (batch, count))
    return ops.softmax(scores, axis=1)


def modality_attention(vectors: Sequence[Tensor], p: ModalityAttentionParams) -> Tensor:
    """Softmax-weighted fusion of k (B, H) modality vectors"""
    if not vectors:
        raise ShapeError("modality_attention: needs at least one modality vector")
    stacked = ops.stack(list(vectors), axis=1)
    batch, count, hidden = stacked.shape
    beta = modality_weights(stacked, p)
    return ops.reduce_sum(ops.reshape(beta, (batch, count, 1)) * stacked, axis=1)
