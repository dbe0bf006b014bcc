from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .constants import (
    ADAM_EPSILON, ALL_STREAMS, ATTENTION_KINDS, BETA1, BETA2, BLOCK_ORDERS, BYTES_PER_PARAM,
    COORD_DIM, FEATURE_MAPS, HIDDEN_UNITS, LOOKAHEAD_ALPHA, LOOKAHEAD_K, NUM_JOINTS,
    OBSERVATION_FRAMES, POOL_WINDOW, RECURRENT_KINDS, SEQUENCE_STREAMS, STREAM_PSEUDO_IMAGE,
    STREAM_SPEED, ANCHOR_FLOPS, ANCHOR_PARAMS, ANCHOR_WEIGHT_MB,
)
from .errors import ConfigError


def _check_keys(cls: type, data: Dict[str, Any]) -> None:
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError([f"unknown key(s) {unknown}"], source=cls.__name__)


# Architecture and run configs

@dataclass(frozen=True)
class ModelConfig:
    branches: Tuple[Tuple[int, int], ...] = ((1, 1), (2, 1), (3, 1))
    blocks_per_branch: int = 3
    feature_maps: int = FEATURE_MAPS
    attention_kind: str = "cbam"
    recurrent_kind: str = "ugru"
    recurrent_blocks_per_stream: int = 2
    hidden: int = HIDDEN_UNITS
    streams: Tuple[str, ...] = ALL_STREAMS
    dropout: float = 0.5
    l2_final: float = 0.001
    seed: int = 0
    frames: int = OBSERVATION_FRAMES
    joints: int = NUM_JOINTS
    coord_dim: int = COORD_DIM
    block_order: str = "cbam_then_bn"

    @classmethod
    def pie(cls, **overrides: Any) -> 'ModelConfig':
        return replace(cls(), **overrides)

    @classmethod
    def jaad(cls, **overrides: Any) -> 'ModelConfig':
        """Ego speed is not available for JAAD"""
        streams = tuple(s for s in ALL_STREAMS if s != STREAM_SPEED)
        return replace(cls(streams=streams), **overrides)

    @classmethod
    def tiny(cls, **overrides: Any) -> 'ModelConfig':
        """Smallest config that still exercises every layer kind"""
        base = cls(
            branches=((1, 1), (2, 1)),
            blocks_per_branch=1,
            feature_maps=2,
            hidden=2,
            frames=4,
            joints=2,
            dropout=0.0,
        )
        return replace(base, **overrides)

    @property
    def jcd_dim(self) -> int:
        return self.joints * (self.joints - 1) // 2

    def has_stream(self, stream: str) -> bool:
        return stream in self.streams

    def validate(self) -> List[str]:
        """Return every violation; empty when the config is buildable"""
        problems: List[str] = []
        if not self.streams:
            problems.append("at least one stream must be enabled")
        for stream in self.streams:
            if stream not in ALL_STREAMS:
                problems.append(f"unknown stream '{stream}'")
        if len(set(self.streams)) != len(self.streams):
            problems.append(f"duplicate streams in {self.streams}")
        if self.attention_kind not in ATTENTION_KINDS:
            problems.append(f"attention_kind must be one of {ATTENTION_KINDS}, got '{self.attention_kind}'")
        if self.recurrent_kind not in RECURRENT_KINDS:
            problems.append(f"recurrent_kind must be one of {RECURRENT_KINDS}, got '{self.recurrent_kind}'")
        if self.block_order not in BLOCK_ORDERS:
            problems.append(f"block_order must be one of {BLOCK_ORDERS}, got '{self.block_order}'")
        for name in ("blocks_per_branch", "feature_maps", "hidden", "recurrent_blocks_per_stream",
                     "frames", "joints", "coord_dim"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0.0 <= self.dropout < 1.0:
            problems.append(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.l2_final < 0:
            problems.append(f"l2_final must be >= 0, got {self.l2_final}")
        if self.has_stream("jcd") and self.joints < 2:
            problems.append("jcd stream needs at least 2 joints")

        if self.has_stream(STREAM_PSEUDO_IMAGE):
            if not self.branches:
                problems.append("pseudo_image stream needs at least one branch")
            for dilation in self.branches:
                if len(dilation) != 2 or min(dilation) < 1:
                    problems.append(f"dilation {dilation} must be a pair of positive integers")
            height, width = self.frames, self.joints
            for stage in range(self.blocks_per_branch):
                if height < POOL_WINDOW or width < POOL_WINDOW:
                    problems.append(
                        f"stage {stage + 1} input {height}x{width} is smaller than the pooling window"
                    )
                    break
                height, width = height // POOL_WINDOW, width // POOL_WINDOW
            if any(s in self.streams for s in SEQUENCE_STREAMS) and self.feature_maps != self.hidden:
                problems.append(
                    f"feature_maps ({self.feature_maps}) must equal hidden ({self.hidden}) for modality fusion"
                )
        return problems

    def check(self) -> 'ModelConfig':
        if problems := self.validate():
            raise ConfigError(problems, source="ModelConfig")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['branches'] = [list(b) for b in self.branches]
        data['streams'] = {s: s in self.streams for s in ALL_STREAMS}
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ModelConfig':
        _check_keys(cls, data)
        values = dict(data)
        if 'branches' in values:
            values['branches'] = tuple(tuple(int(r) for r in b) for b in values['branches'])
        if 'streams' in values:
            flags = values['streams']
            if isinstance(flags, dict):
                unknown = sorted(set(flags) - set(ALL_STREAMS))
                if unknown:
                    raise ConfigError([f"unknown stream flag(s) {unknown}"], source="ModelConfig")
                values['streams'] = tuple(s for s in ALL_STREAMS if flags.get(s, False))
            else:
                values['streams'] = tuple(flags)
        return cls(**values)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 80
    batch_size: int = 8
    lr: float = 5.0e-05
    seed: int = 0
    class_weights: Optional[Tuple[float, float]] = None
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = ADAM_EPSILON
    lookahead_k: int = LOOKAHEAD_K
    lookahead_alpha: float = LOOKAHEAD_ALPHA

    @classmethod
    def pie(cls, **overrides: Any) -> 'TrainConfig':
        return replace(cls(lr=5.0e-05), **overrides)

    @classmethod
    def jaad(cls, **overrides: Any) -> 'TrainConfig':
        return replace(cls(lr=5.0e-06), **overrides)

    def validate(self) -> List[str]:
        problems: List[str] = []
        if self.epochs < 0:
            problems.append(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr < 0:
            problems.append(f"lr must be >= 0, got {self.lr}")
        if self.class_weights is not None and (len(self.class_weights) != 2 or min(self.class_weights) <= 0):
            problems.append(f"class_weights must be two positive reals, got {self.class_weights}")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            problems.append(f"betas must lie in [0, 1), got ({self.beta1}, {self.beta2})")
        if self.lookahead_k < 1:
            problems.append(f"lookahead_k must be >= 1, got {self.lookahead_k}")
        if not 0.0 < self.lookahead_alpha <= 1.0:
            problems.append(f"lookahead_alpha must lie in (0, 1], got {self.lookahead_alpha}")
        return problems

    def check(self) -> 'TrainConfig':
        if problems := self.validate():
            raise ConfigError(problems, source="TrainConfig")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['class_weights'] = list(self.class_weights) if self.class_weights else None
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TrainConfig':
        _check_keys(cls, data)
        values = dict(data)
        if values.get('class_weights') is not None:
            values['class_weights'] = tuple(float(w) for w in values['class_weights'])
        return cls(**values)


@dataclass(frozen=True)
class WindowSpec:
    fps: float = 30.0
    m: int = OBSERVATION_FRAMES
    tte_min: float = 1.0
    tte_max: float = 2.0
    stride: int = 8

    @property
    def tte_min_frames(self) -> int:
        return int(round(self.fps * self.tte_min))

    @property
    def tte_max_frames(self) -> int:
        return int(round(self.fps * self.tte_max))

    def validate(self) -> List[str]:
        problems: List[str] = []
        if self.fps <= 0:
            problems.append(f"fps must be positive, got {self.fps}")
        if self.m < 1:
            problems.append(f"m must be >= 1, got {self.m}")
        if not self.tte_min < self.tte_max:
            problems.append(f"tte_min ({self.tte_min}) must be < tte_max ({self.tte_max})")
        if self.stride < 1:
            problems.append(f"stride must be >= 1, got {self.stride}")
        return problems

    def check(self) -> 'WindowSpec':
        if problems := self.validate():
            raise ConfigError(problems, source="WindowSpec")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'WindowSpec':
        _check_keys(cls, data)
        return cls(**data)


@dataclass(frozen=True)
class SyntheticConfig:
    n_tracks: int = 200
    seed: int = 0
    noise_std: float = 0.004
    fps: float = 30.0
    positive_fraction: float = 0.5
    track_frames: int = 150
    n_joints: int = NUM_JOINTS
    speed_present: bool = True
    step_frequency: Tuple[float, float] = (1.4, 2.0)
    step_amplitude: Tuple[float, float] = (0.08, 0.15)
    approach_seconds: Tuple[float, float] = (2.5, 3.5)

    def validate(self) -> List[str]:
        problems: List[str] = []
        if self.n_tracks < 2:
            problems.append(f"n_tracks must be >= 2, got {self.n_tracks}")
        if self.noise_std < 0:
            problems.append(f"noise_std must be >= 0, got {self.noise_std}")
        if self.fps <= 0:
            problems.append(f"fps must be positive, got {self.fps}")
        if not 0.0 <= self.positive_fraction <= 1.0:
            problems.append(f"positive_fraction must lie in [0, 1], got {self.positive_fraction}")
        # a crossing track must hold its whole approach before the event
        min_frames = int(np.ceil(self.approach_seconds[1] * self.fps)) + 1
        if self.track_frames < min_frames:
            problems.append(f"track_frames must be >= {min_frames} at {self.fps} fps, got {self.track_frames}")
        if self.n_joints != NUM_JOINTS:
            problems.append(f"the synthetic walker has {NUM_JOINTS} joints, got n_joints={self.n_joints}")
        for name in ("step_frequency", "step_amplitude", "approach_seconds"):
            low, high = getattr(self, name)
            if not 0 <= low <= high:
                problems.append(f"{name} must be an ordered non-negative range, got {(low, high)}")
        return problems

    def check(self) -> 'SyntheticConfig':
        if problems := self.validate():
            raise ConfigError(problems, source="SyntheticConfig")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['step_frequency'] = list(self.step_frequency)
        data['step_amplitude'] = list(self.step_amplitude)
        data['approach_seconds'] = list(self.approach_seconds)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SyntheticConfig':
        _check_keys(cls, data)
        values = dict(data)
        for name in ("step_frequency", "step_amplitude", "approach_seconds"):
            if name in values:
                values[name] = tuple(float(v) for v in values[name])
        return cls(**values)


@dataclass(frozen=True)
class SplitConfig:
    fractions: Tuple[float, float, float] = (0.7, 0.15, 0.15)
    seed: int = 0

    def validate(self) -> List[str]:
        if len(self.fractions) != 3 or min(self.fractions) < 0 or abs(sum(self.fractions) - 1.0) > 1e-9:
            return [f"fractions must be three non-negative values summing to 1, got {self.fractions}"]
        return []

    def to_dict(self) -> Dict[str, Any]:
        return {'fractions': list(self.fractions), 'seed': self.seed}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SplitConfig':
        _check_keys(cls, data)
        values = dict(data)
        if 'fractions' in values:
            values['fractions'] = tuple(float(f) for f in values['fractions'])
        return cls(**values)


# Tracks

@dataclass
class TrackRecord:
    """
    One pedestrian time series.

    Per-frame values are held as arrays: keypoints (T, N, 2), bboxes (T, 4) as
    normalized (x1, y1, x2, y2), ego_speed (T,) or None when the source has no
    vehicle speed.
    """
    track_id: str
    fps: float
    keypoints: np.ndarray
    bboxes: np.ndarray
    label: int
    event_frame: Optional[int] = None
    ego_speed: Optional[np.ndarray] = None

    @property
    def num_frames(self) -> int:
        return int(self.keypoints.shape[0])

    @property
    def num_joints(self) -> int:
        return int(self.keypoints.shape[1])

    @property
    def speed_present(self) -> bool:
        return self.ego_speed is not None

    def validate(self) -> List[str]:
        problems: List[str] = []
        if not self.track_id:
            problems.append("track_id must be a non-empty string")
        if self.fps <= 0:
            problems.append(f"fps must be positive, got {self.fps}")
        if self.keypoints.ndim != 3 or self.keypoints.shape[2] != COORD_DIM:
            problems.append(f"keypoints must be (T, N, {COORD_DIM}), got {self.keypoints.shape}")
            return problems
        frames = self.num_frames
        if self.bboxes.shape != (frames, 4):
            problems.append(f"bboxes must be ({frames}, 4), got {self.bboxes.shape}")
        for name, arr in (("keypoints", self.keypoints), ("bboxes", self.bboxes)):
            if not np.isfinite(arr).all():
                problems.append(f"{name} contain non-finite values")
            elif arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
                problems.append(f"{name} must lie in [0, 1]")
        if self.bboxes.shape == (frames, 4):
            bad = np.nonzero((self.bboxes[:, 0] > self.bboxes[:, 2]) | (self.bboxes[:, 1] > self.bboxes[:, 3]))[0]
            if bad.size:
                problems.append(f"bbox corners out of order at frame {int(bad[0])}")
        if self.ego_speed is not None:
            if self.ego_speed.shape != (frames,):
                problems.append(f"ego_speed must be ({frames},), got {self.ego_speed.shape}")
            elif not np.isfinite(self.ego_speed).all():
                problems.append("ego_speed contains non-finite values")
        if self.label not in (0, 1):
            problems.append(f"label must be 0 or 1, got {self.label}")
        if self.label == 1 and self.event_frame is None:
            problems.append("event_frame is required when label is 1")
        if self.event_frame is not None and not 0 <= self.event_frame < frames:
            problems.append(f"event_frame {self.event_frame} outside track of {frames} frames")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        """Convert to the on-disk per-frame layout"""
        frames = []
        for t in range(self.num_frames):
            frame: Dict[str, Any] = {
                'keypoints': self.keypoints[t].tolist(),
                'bbox': self.bboxes[t].tolist(),
            }
            if self.ego_speed is not None:
                frame['ego_speed'] = float(self.ego_speed[t])
            frames.append(frame)
        return {
            'track_id': self.track_id,
            'fps': self.fps,
            'label': self.label,
            'event_frame': self.event_frame,
            'frames': frames,
        }


# Results and reports

@dataclass
class Metrics:
    acc: float
    auc: Optional[float]
    f1: float
    precision: float
    recall: float
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Metrics':
        return cls(**{f.name: data[f.name] for f in fields(cls)})


@dataclass(frozen=True)
class ProfileRow:
    name: str
    params: int
    flops: int


@dataclass
class ProfileReport:
    rows: List[ProfileRow]
    total_params: int
    total_flops: int
    weight_bytes: int
    anchor_params: int = ANCHOR_PARAMS
    anchor_flops: int = ANCHOR_FLOPS
    anchor_weight_mb: float = ANCHOR_WEIGHT_MB
    additional_cost_params: int = 0

    @classmethod
    def from_rows(cls, rows: List[ProfileRow], additional_cost_params: int = 0) -> 'ProfileReport':
        total_params = sum(r.params for r in rows)
        return cls(
            rows=list(rows),
            total_params=total_params,
            total_flops=sum(r.flops for r in rows),
            weight_bytes=total_params * BYTES_PER_PARAM,
            additional_cost_params=additional_cost_params,
        )

    @property
    def params_with_additional_costs(self) -> int:
        return self.total_params + self.additional_cost_params

    @property
    def params_delta(self) -> int:
        return self.total_params - self.anchor_params

    def to_dict(self) -> Dict[str, Any]:
        return {
            'rows': [asdict(r) for r in self.rows],
            'total_params': self.total_params,
            'total_flops': self.total_flops,
            'weight_bytes': self.weight_bytes,
            'anchor_params': self.anchor_params,
            'anchor_flops': self.anchor_flops,
            'anchor_weight_mb': self.anchor_weight_mb,
            'additional_cost_params': self.additional_cost_params,
        }


@dataclass
class GradCheckReport:
    max_relative_error: float
    per_parameter_errors: Dict[str, float] = field(default_factory=dict)

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_relative_error < tolerance


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_acc: Optional[float] = None
    val_auc: Optional[float] = None
    val_f1: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class RunManifest:
    command: str
    config: Dict[str, Any]
    seed: Optional[int]
    artifacts: Dict[str, str]
    wall_clock_seconds: float
    started_at: str
    version: str

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class AblationRow:
    variant: str
    params: int
    metrics: Metrics

    def to_dict(self) -> Dict[str, Any]:
        return {'variant': self.variant, 'params': self.params, **self.metrics.to_dict()}


@dataclass
class TrainingLog:
    """Run header plus one record per epoch, written as JSON lines"""
    header: Dict[str, Any]
    epochs: List[EpochRecord] = field(default_factory=list)

    def to_lines(self) -> List[Dict[str, Any]]:
        return [{'header': self.header}] + [e.to_dict() for e in self.epochs]


# Encoded model inputs

@dataclass
class ContextFeatures:
    """Per-window boxes (m, 4) and ego speed (m, 1); speed is None when absent"""
    boxes: np.ndarray
    speed: Optional[np.ndarray] = None

    @property
    def speed_present(self) -> bool:
        return self.speed is not None


@dataclass(frozen=True)
class ContextStats:
    speed_mean: float
    speed_std: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ContextStats':
        return cls(speed_mean=float(data['speed_mean']), speed_std=float(data['speed_std']))


@dataclass
class Window:
    """One observation window cut from a track"""
    track_id: str
    pose: np.ndarray
    context: ContextFeatures
    label: int
    last_frame: int


@dataclass
class EncodedSample:
    label: int
    pseudo_image: np.ndarray
    jcd: np.ndarray
    bbox: np.ndarray
    speed: Optional[np.ndarray] = None
    track_id: str = ""

    def stream(self, name: str) -> Optional[np.ndarray]:
        return getattr(self, name)


@dataclass
class EncodedBatch:
    """Stream name -> array with a leading batch axis"""
    inputs: Dict[str, np.ndarray]
    labels: np.ndarray

    def __len__(self) -> int:
        return int(self.labels.shape[0])
