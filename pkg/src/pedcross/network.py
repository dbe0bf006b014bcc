import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Union

import numpy as np

from .autodiff import Tensor, no_grad, ops
from .constants import (
    ALL_STREAMS, BBOX_DIM, SEQUENCE_STREAMS, STREAM_BBOX, STREAM_JCD, STREAM_PSEUDO_IMAGE, STREAM_SPEED,
)
from .errors import ShapeError, StreamMissingError
from .layers import (
    BatchNormState, CBAMParams, ConvParams, DenseParams, ModalityAttentionParams, ParameterStore,
    RecurrentBlockParams, SEParams, TemporalAttentionParams, atrous_conv2d, batch_norm, cbam, dense,
    dropout, max_pool2d, modality_attention, recurrent_block, se_block, temporal_attention,
)
from .models import EncodedBatch, ModelConfig

logger = logging.getLogger(__name__)

BatchLike = Union[EncodedBatch, Mapping[str, np.ndarray]]

# Ablation variants, in report order
VARIANT_NAMES = (
    "default",
    "no_jcd",
    "no_parallel_branches",
    "gru",
    "bigru",
    "no_attention",
    "se_attention",
)


@dataclass
class BranchStage:
    conv: ConvParams
    norm: BatchNormState
    attention: Optional[Union[CBAMParams, SEParams]] = None


@dataclass
class SequenceStream:
    blocks: List[RecurrentBlockParams]
    attention: TemporalAttentionParams


@dataclass
class NetworkParts:
    branches: List[List[BranchStage]] = field(default_factory=list)
    streams: Dict[str, SequenceStream] = field(default_factory=dict)
    fusion: Optional[ModalityAttentionParams] = None
    head: Optional[DenseParams] = None


def stream_input_size(config: ModelConfig, stream: str) -> int:
    if stream == STREAM_JCD:
        return config.jcd_dim
    if stream == STREAM_BBOX:
        return BBOX_DIM
    if stream == STREAM_SPEED:
        return 1
    raise ValueError(f"'{stream}' is not a sequence stream")


def expected_shape(config: ModelConfig, stream: str) -> tuple:
    """Per-sample input shape of a stream"""
    if stream == STREAM_PSEUDO_IMAGE:
        return (config.frames, config.joints, config.coord_dim)
    return (config.frames, stream_input_size(config, stream))


class CrossingNet:
    """
    Crossing predictor: parallel atrous branches over the pose pseudo-image and
    recurrent encoders over JCD, boxes and ego speed, fused by modality attention
    into one sigmoid output.
    """

    def __init__(self, config: ModelConfig, store: ParameterStore, parts: NetworkParts) -> None:
        self.config = config
        self.store = store
        self.parts = parts
        self._dropout_rng = np.random.default_rng([config.seed, 1])

    @classmethod
    def build(cls, config: ModelConfig) -> 'CrossingNet':
        config.check()
        store = ParameterStore(config.seed)
        parts = NetworkParts()

        if config.has_stream(STREAM_PSEUDO_IMAGE):
            for b, dilation in enumerate(config.branches):
                stages = []
                in_channels = config.coord_dim
                for s in range(config.blocks_per_branch):
                    prefix = f"branch{b}.stage{s}"
                    conv = store.conv(f"{prefix}.conv", in_channels, config.feature_maps, dilation=tuple(dilation))
                    attention = None
                    if config.attention_kind == "cbam":
                        attention = store.cbam(f"{prefix}.cbam", config.feature_maps)
                    elif config.attention_kind == "se":
                        attention = store.se(f"{prefix}.se", config.feature_maps)
                    norm = store.batch_norm(f"{prefix}.bn", config.feature_maps)
                    stages.append(BranchStage(conv=conv, norm=norm, attention=attention))
                    in_channels = config.feature_maps
                parts.branches.append(stages)

        for stream in SEQUENCE_STREAMS:
            if not config.has_stream(stream):
                continue
            blocks = []
            in_size = stream_input_size(config, stream)
            for k in range(config.recurrent_blocks_per_stream):
                blocks.append(store.recurrent_block(f"{stream}.block{k}", config.recurrent_kind, in_size, config.hidden))
                in_size = config.hidden
            attention = store.temporal_attention(f"{stream}.attention", config.hidden)
            parts.streams[stream] = SequenceStream(blocks=blocks, attention=attention)

        parts.fusion = store.modality_attention("fusion", config.hidden)
        parts.head = store.dense("head", config.hidden, 1)
        model = cls(config, store, parts)
        logger.debug(f"Built model with {len(store)} tensors, {model.param_count()} trainable scalars")
        return model

    @property
    def streams(self) -> List[str]:
        return [s for s in ALL_STREAMS if self.config.has_stream(s)]

    def parameters(self) -> Dict[str, Tensor]:
        return self.store.parameters()

    def param_count(self) -> int:
        return self.store.count()

    def final_weight(self) -> Tensor:
        return self.parts.head.weight

    def zero_grad(self) -> None:
        for tensor in self.store.parameters().values():
            tensor.zero_grad()

    def _stage(self, x: Tensor, stage: BranchStage, mode: str) -> Tensor:
        x = atrous_conv2d(x, stage.conv)
        if self.config.block_order == "bn_then_cbam":
            x = batch_norm(x, stage.norm, mode)
            x = self._attend(x, stage)
        else:
            x = self._attend(x, stage)
            x = batch_norm(x, stage.norm, mode)
        return max_pool2d(x)

    def _attend(self, x: Tensor, stage: BranchStage) -> Tensor:
        if isinstance(stage.attention, CBAMParams):
            return cbam(x, stage.attention)
        if isinstance(stage.attention, SEParams):
            return se_block(x, stage.attention)
        return x

    def image_vector(self, image: np.ndarray, mode: str) -> Tensor:
        """(B, m, N, d) pseudo-images -> summed (B, feature_maps) branch vector"""
        x = Tensor(np.ascontiguousarray(image.transpose(0, 3, 1, 2)))
        total = None
        for stages in self.parts.branches:
            out = x
            for stage in stages:
                out = self._stage(out, stage, mode)
            vector = ops.global_avg_pool(out)
            total = vector if total is None else total + vector
        return total

    def sequence_vector(self, stream: str, sequence: np.ndarray) -> Tensor:
        encoder = self.parts.streams[stream]
        x = Tensor(sequence)
        for block in encoder.blocks:
            x = recurrent_block(x, block)
        return temporal_attention(x, encoder.attention)

    def _inputs(self, batch: BatchLike) -> Mapping[str, np.ndarray]:
        inputs = batch.inputs if isinstance(batch, EncodedBatch) else batch
        size = None
        for stream in self.streams:
            if stream not in inputs:
                raise StreamMissingError(stream)
            arr = np.asarray(inputs[stream], dtype=np.float64)
            expected = expected_shape(self.config, stream)
            if arr.shape[1:] != expected:
                raise ShapeError(f"model: stream '{stream}' has per-sample shape {arr.shape[1:]}, expected {expected}")
            if size is not None and arr.shape[0] != size:
                raise ShapeError(f"model: stream '{stream}' holds {arr.shape[0]} samples, other streams {size}")
            size = arr.shape[0]
        return inputs

    def forward(self, batch: BatchLike, mode: str = "eval", rng: Optional[np.random.Generator] = None) -> Tensor:
        """Crossing probability per sample, shape (B,)"""
        if mode not in ("train", "eval"):
            raise ValueError(f"Unknown mode '{mode}', expected 'train' or 'eval'")
        inputs = self._inputs(batch)
        vectors = []
        if self.config.has_stream(STREAM_PSEUDO_IMAGE):
            vectors.append(self.image_vector(np.asarray(inputs[STREAM_PSEUDO_IMAGE], dtype=np.float64), mode))
        for stream in SEQUENCE_STREAMS:
            if self.config.has_stream(stream):
                vectors.append(self.sequence_vector(stream, np.asarray(inputs[stream], dtype=np.float64)))

        fused = modality_attention(vectors, self.parts.fusion)
        fused = dropout(fused, self.config.dropout, mode, rng if rng is not None else self._dropout_rng)
        logits = dense(fused, self.parts.head)
        return ops.reshape(ops.sigmoid(logits), (logits.shape[0],))

    def predict(self, batch: BatchLike) -> np.ndarray:
        with no_grad():
            return self.forward(batch, mode="eval").numpy()


def build(config: ModelConfig) -> CrossingNet:
    return CrossingNet.build(config)


def variant_configs(base: Optional[ModelConfig] = None) -> Dict[str, ModelConfig]:
    """Ablation variant name -> config derived from `base`"""
    base = base or ModelConfig.pie()
    return {
        "default": base,
        "no_jcd": replace(base, streams=tuple(s for s in base.streams if s != STREAM_JCD)),
        "no_parallel_branches": replace(base, branches=((1, 1),)),
        "gru": replace(base, recurrent_kind="gru"),
        "bigru": replace(base, recurrent_kind="bigru"),
        "no_attention": replace(base, attention_kind="none"),
        "se_attention": replace(base, attention_kind="se"),
    }
