import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .constants import ALL_STREAMS, BBOX_DIM, STREAM_SPEED
from .errors import FeatureError, ShapeError
from .models import ContextFeatures, ContextStats, EncodedBatch, EncodedSample, Window

logger = logging.getLogger(__name__)


def _check_pose(pose: np.ndarray) -> np.ndarray:
    pose = np.asarray(pose, dtype=np.float64)
    if pose.ndim != 3:
        raise ShapeError(f"features: pose sequence must be (m, N, d), got {pose.shape}")
    if not np.isfinite(pose).all():
        raise FeatureError("features: pose sequence contains non-finite coordinates")
    return pose


def encode_pseudo_image(pose: np.ndarray) -> np.ndarray:
    """Rows are frames, columns are joints, channels are coordinates"""
    return _check_pose(pose).copy()


def decode_pseudo_image(image: np.ndarray) -> np.ndarray:
    return _check_pose(image).copy()


@lru_cache(maxsize=None)
def pair_indices(n_joints: int) -> Tuple[np.ndarray, np.ndarray]:
    """Joint pairs (j, k) with j < k in lexicographic order"""
    first, second = np.triu_indices(n_joints, k=1)
    first.setflags(write=False)
    second.setflags(write=False)
    return first, second


def jcd(pose: np.ndarray) -> np.ndarray:
    """Per-frame Euclidean distances of every joint pair, shape (m, N(N-1)/2)"""
    pose = _check_pose(pose)
    first, second = pair_indices(pose.shape[1])
    diff = pose[:, first, :] - pose[:, second, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def context_stats(contexts: Sequence[ContextFeatures]) -> Optional[ContextStats]:
    """Speed mean/std over the given (training) contexts; None when no speed is present"""
    speeds = [c.speed.reshape(-1) for c in contexts if c.speed_present]
    if not speeds:
        return None
    values = np.concatenate(speeds)
    return ContextStats(speed_mean=float(values.mean()), speed_std=float(values.std()))


def standardize_context(context: ContextFeatures, stats: Optional[ContextStats]) -> ContextFeatures:
    """Z-score the ego speed with training statistics; boxes stay normalized"""
    boxes = np.asarray(context.boxes, dtype=np.float64)
    if boxes.ndim != 2 or boxes.shape[1] != BBOX_DIM:
        raise ShapeError(f"features: boxes must be (m, {BBOX_DIM}), got {boxes.shape}")
    if not context.speed_present:
        return ContextFeatures(boxes=boxes.copy(), speed=None)
    if stats is None:
        raise FeatureError("features: speed is present but no speed statistics were given")
    if not stats.speed_std > 0:
        raise FeatureError(f"features: cannot standardize 'speed' with std {stats.speed_std}")
    speed = (np.asarray(context.speed, dtype=np.float64) - stats.speed_mean) / stats.speed_std
    return ContextFeatures(boxes=boxes.copy(), speed=speed.reshape(-1, 1))


def encode_window(window: Window, stats: Optional[ContextStats]) -> EncodedSample:
    context = standardize_context(window.context, stats)
    return EncodedSample(
        label=int(window.label),
        pseudo_image=encode_pseudo_image(window.pose),
        jcd=jcd(window.pose),
        bbox=context.boxes,
        speed=context.speed,
        track_id=window.track_id,
    )


def encode_windows(windows: Sequence[Window], stats: Optional[ContextStats]) -> List[EncodedSample]:
    return [encode_window(w, stats) for w in windows]


def stack_samples(samples: Sequence[EncodedSample], streams: Sequence[str] = ALL_STREAMS) -> EncodedBatch:
    """
    Stack the requested streams along a new batch axis. A stream some sample
    lacks is left out of the batch; the model reports it if it needs it.
    """
    if not samples:
        raise ShapeError("features: cannot stack an empty sample list")
    inputs = {}
    for stream in streams:
        arrays = [s.stream(stream) for s in samples]
        if any(a is None for a in arrays):
            if stream == STREAM_SPEED:
                logger.debug("speed missing from at least one sample; leaving it out of the batch")
            continue
        shapes = {a.shape for a in arrays}
        if len(shapes) != 1:
            raise ShapeError(f"features: stream '{stream}' has mixed shapes {sorted(shapes)}")
        inputs[stream] = np.stack(arrays)
    labels = np.array([s.label for s in samples], dtype=np.float64)
    return EncodedBatch(inputs=inputs, labels=labels)
