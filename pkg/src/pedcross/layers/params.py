import logging
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from pedcross.autodiff import Tensor
from pedcross.constants import ATTENTION_REDUCTION, BN_EPSILON, BN_MOMENTUM, KERNEL_SIZE, SPATIAL_KERNEL
from pedcross.errors import CheckpointError

logger = logging.getLogger(__name__)


@dataclass
class ConvParams:
    weight: Tensor
    bias: Tensor
    dilation: Tuple[int, int] = (1, 1)

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]


@dataclass
class DenseParams:
    weight: Tensor
    bias: Tensor


@dataclass
class BatchNormState:
    """Affine parameters are trainable; running statistics are buffers"""
    gamma: Tensor
    beta: Tensor
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = BN_MOMENTUM
    epsilon: float = BN_EPSILON


@dataclass
class GRUCellParams:
    w_z: Tensor
    w_r: Tensor
    w_h: Tensor
    u_z: Tensor
    u_r: Tensor
    u_h: Tensor
    b_z: Tensor
    b_r: Tensor
    b_h: Tensor

    @property
    def hidden_size(self) -> int:
        return self.u_z.shape[0]

    @property
    def input_size(self) -> int:
        return self.w_z.shape[0]

    def tensors(self) -> Tuple[Tensor, ...]:
        return (self.w_z, self.w_r, self.w_h, self.u_z, self.u_r, self.u_h, self.b_z, self.b_r, self.b_h)


@dataclass
class RecurrentBlockParams:
    """`second` is None for the single-layer gru kind"""
    kind: str
    first: GRUCellParams
    second: Optional[GRUCellParams] = None


@dataclass
class CBAMParams:
    mlp_hidden: DenseParams
    mlp_out: DenseParams
    spatial: ConvParams


@dataclass
class SEParams:
    squeeze: DenseParams
    excite: DenseParams


@dataclass
class TemporalAttentionParams:
    w_state: Tensor
    w_last: Tensor
    bias: Tensor
    score: Tensor


@dataclass
class ModalityAttentionParams:
    weight: Tensor
    bias: Tensor
    score: Tensor


def reduced_width(channels: int, ratio: int = ATTENTION_REDUCTION) -> int:
    return max(1, channels // ratio)


class ParameterStore:
    """
    Owns every trainable tensor and buffer of a model under hierarchical names.

    Tensors are created in a fixed order from one seeded generator, so two stores
    built with the same seed and calls hold identical values.
    """

    def __init__(self, seed: int = 0) -> None:
        self.rng = np.random.default_rng(seed)
        self._params: Dict[str, Tensor] = {}
        self._norms: Dict[str, BatchNormState] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def parameters(self) -> Dict[str, Tensor]:
        return dict(self._params)

    def count(self) -> int:
        return sum(t.size for t in self._params.values())

    def buffers(self) -> Dict[str, np.ndarray]:
        out: Dict[str, np.ndarray] = {}
        for name, state in self._norms.items():
            out[f"{name}.running_mean"] = state.running_mean
            out[f"{name}.running_var"] = state.running_var
        return out

    def set_buffer(self, key: str, value: np.ndarray) -> None:
        name, _, attr = key.rpartition('.')
        state = self._norms.get(name)
        if state is None or attr not in ("running_mean", "running_var"):
            raise CheckpointError(f"checkpoint: unknown buffer '{key}'")
        current = getattr(state, attr)
        if current.shape != value.shape:
            raise CheckpointError(f"checkpoint: buffer '{key}' has shape {value.shape}, model expects {current.shape}")
        setattr(state, attr, np.array(value, dtype=np.float64))

    def _register(self, name: str, data: np.ndarray) -> Tensor:
        if name in self._params:
            raise ValueError(f"Parameter '{name}' already registered")
        tensor = Tensor(data, requires_grad=True, name=name)
        self._params[name] = tensor
        return tensor

    def glorot(self, name: str, shape: Tuple[int, ...], fan_in: int, fan_out: int) -> Tensor:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return self._register(name, self.rng.uniform(-limit, limit, size=shape))

    def zeros(self, name: str, shape: Tuple[int, ...]) -> Tensor:
        return self._register(name, np.zeros(shape))

    def ones(self, name: str, shape: Tuple[int, ...]) -> Tensor:
        return self._register(name, np.ones(shape))

    # Layer factories

    def conv(self, name: str, in_channels: int, out_channels: int,
             kernel: Tuple[int, int] = (KERNEL_SIZE, KERNEL_SIZE),
             dilation: Tuple[int, int] = (1, 1)) -> ConvParams:
        kh, kw = kernel
        weight = self.glorot(f"{name}.weight", (out_channels, in_channels, kh, kw),
                             fan_in=in_channels * kh * kw, fan_out=out_channels * kh * kw)
        bias = self.zeros(f"{name}.bias", (out_channels,))
        return ConvParams(weight=weight, bias=bias, dilation=tuple(dilation))

    def dense(self, name: str, in_features: int, out_features: int) -> DenseParams:
        weight = self.glorot(f"{name}.weight", (in_features, out_features), in_features, out_features)
        return DenseParams(weight=weight, bias=self.zeros(f"{name}.bias", (out_features,)))

    def batch_norm(self, name: str, channels: int) -> BatchNormState:
        state = BatchNormState(
            gamma=self.ones(f"{name}.gamma", (channels,)),
            beta=self.zeros(f"{name}.beta", (channels,)),
            running_mean=np.zeros(channels),
            running_var=np.ones(channels),
        )
        self._norms[name] = state
        return state

    def gru_cell(self, name: str, input_size: int, hidden_size: int) -> GRUCellParams:
        w = {g: self.glorot(f"{name}.w_{g}", (input_size, hidden_size), input_size, hidden_size) for g in "zrh"}
        u = {g: self.glorot(f"{name}.u_{g}", (hidden_size, hidden_size), hidden_size, hidden_size) for g in "zrh"}
        b = {g: self.zeros(f"{name}.b_{g}", (hidden_size,)) for g in "zrh"}
        return GRUCellParams(
            w_z=w['z'], w_r=w['r'], w_h=w['h'],
            u_z=u['z'], u_r=u['r'], u_h=u['h'],
            b_z=b['z'], b_r=b['r'], b_h=b['h'],
        )

    def recurrent_block(self, name: str, kind: str, input_size: int, hidden_size: int) -> RecurrentBlockParams:
        if kind == "ugru":
            first = self.gru_cell(f"{name}.reverse", input_size, hidden_size)
            second = self.gru_cell(f"{name}.forward", input_size + hidden_size, hidden_size)
        elif kind == "bigru":
            first = self.gru_cell(f"{name}.forward", input_size, hidden_size)
            second = self.gru_cell(f"{name}.reverse", input_size, hidden_size)
        elif kind == "gru":
            first, second = self.gru_cell(f"{name}.forward", input_size, hidden_size), None
        else:
            raise ValueError(f"Unknown recurrent kind '{kind}'")
        return RecurrentBlockParams(kind=kind, first=first, second=second)

    def cbam(self, name: str, channels: int) -> CBAMParams:
        hidden = reduced_width(channels)
        return CBAMParams(
            mlp_hidden=self.dense(f"{name}.mlp_hidden", channels, hidden),
            mlp_out=self.dense(f"{name}.mlp_out", hidden, channels),
            spatial=self.conv(f"{name}.spatial", 2, 1, kernel=(SPATIAL_KERNEL, SPATIAL_KERNEL)),
        )

    def se(self, name: str, channels: int) -> SEParams:
        hidden = reduced_width(channels)
        return SEParams(
            squeeze=self.dense(f"{name}.squeeze", channels, hidden),
            excite=self.dense(f"{name}.excite", hidden, channels),
        )

    def temporal_attention(self, name: str, hidden: int, width: Optional[int] = None) -> TemporalAttentionParams:
        width = width or hidden
        return TemporalAttentionParams(
            w_state=self.glorot(f"{name}.w_state", (hidden, width), hidden, width),
            w_last=self.glorot(f"{name}.w_last", (hidden, width), hidden, width),
            bias=self.zeros(f"{name}.bias", (width,)),
            score=self.glorot(f"{name}.score", (width, 1), width, 1),
        )

    def modality_attention(self, name: str, hidden: int, width: Optional[int] = None) -> ModalityAttentionParams:
        width = width or hidden
        return ModalityAttentionParams(
            weight=self.glorot(f"{name}.weight", (hidden, width), hidden, width),
            bias=self.zeros(f"{name}.bias", (width,)),
            score=self.glorot(f"{name}.score", (width, 1), width, 1),
        )
