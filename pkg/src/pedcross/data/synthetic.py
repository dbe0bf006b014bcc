"""
Synthetic pedestrian scenarios built on an 18-joint walker (OpenPose COCO order).

Crossing tracks: the pedestrian turns toward the road, its lateral velocity ramps
up and its gait quickens before the event frame. Non-crossing tracks: walking
along the road (depth motion, small heading jitter) or standing still.
"""
import logging
from typing import List

import numpy as np

from pedcross.constants import NUM_JOINTS
from pedcross.models import SyntheticConfig, TrackRecord

logger = logging.getLogger(__name__)

CROSSING = "crossing"
PARALLEL = "parallel"
STANDING = "standing"
MOTION_KINDS = (CROSSING, PARALLEL, STANDING)

# Offsets from the hip centre in body heights, x to the right, y down
TEMPLATE = np.array([
    [0.00, -0.42],   # nose
    [0.00, -0.33],   # neck
    [-0.09, -0.32],  # right shoulder
    [-0.11, -0.18],  # right elbow
    [-0.12, -0.05],  # right wrist
    [0.09, -0.32],   # left shoulder
    [0.11, -0.18],   # left elbow
    [0.12, -0.05],   # left wrist
    [-0.05, 0.00],   # right hip
    [-0.05, 0.25],   # right knee
    [-0.05, 0.50],   # right ankle
    [0.05, 0.00],    # left hip
    [0.05, 0.25],    # left knee
    [0.05, 0.50],    # left ankle
    [-0.02, -0.44],  # right eye
    [0.02, -0.44],   # left eye
    [-0.04, -0.43],  # right ear
    [0.04, -0.43],   # left ear
])

# Horizontal leg/arm swing per joint, seen in profile
SWING = np.zeros(NUM_JOINTS)
SWING[[9, 10, 12, 13]] = [0.5, 1.0, -0.5, -1.0]
SWING[[3, 4, 6, 7]] = [-0.3, -0.6, 0.3, 0.6]

RIGHT_ANKLE, LEFT_ANKLE = 10, 13
TURN_SECONDS = 1.0
RAMP_SECONDS = 1.5
BOX_MARGIN = 0.02


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def pose_frames(cx: np.ndarray, cy: np.ndarray, height: np.ndarray, heading: np.ndarray,
                phase: np.ndarray, amplitude: np.ndarray) -> np.ndarray:
    """(T, 18, 2) joint positions from per-frame body state; heading 0 faces the camera"""
    width = 0.15 + 0.85 * np.abs(np.cos(heading))
    stride = amplitude * np.sin(phase)
    x_rel = TEMPLATE[None, :, 0] * width[:, None] + SWING[None, :] * (stride * np.sin(heading))[:, None]
    y_rel = np.repeat(TEMPLATE[None, :, 1], len(cx), axis=0)
    lift = 0.3 * amplitude * np.abs(np.cos(heading))
    y_rel[:, RIGHT_ANKLE] -= lift * np.maximum(0.0, np.sin(phase))
    y_rel[:, LEFT_ANKLE] -= lift * np.maximum(0.0, -np.sin(phase))
    x = cx[:, None] + height[:, None] * x_rel
    y = cy[:, None] + height[:, None] * y_rel
    return np.stack([x, y], axis=-1)


def _boxes(keypoints: np.ndarray, height: np.ndarray) -> np.ndarray:
    margin = BOX_MARGIN * height[:, None]
    low = np.clip(keypoints.min(axis=1) - margin, 0.0, 1.0)
    high = np.clip(keypoints.max(axis=1) + margin, 0.0, 1.0)
    return np.concatenate([low, high], axis=1)


def _ego_speed(rng: np.random.Generator, frames: int) -> np.ndarray:
    start = rng.uniform(5.0, 40.0)
    accel = np.cumsum(rng.normal(0.0, 0.02, size=frames))
    return np.clip(start + np.cumsum(np.clip(accel, -0.5, 0.5)), 0.0, None)


def generate_track(kind: str, track_id: str, cfg: SyntheticConfig, rng: np.random.Generator) -> TrackRecord:
    if kind not in MOTION_KINDS:
        raise ValueError(f"Unknown motion kind '{kind}', expected one of {MOTION_KINDS}")
    fps = cfg.fps
    if kind == CROSSING:
        frames = cfg.track_frames
    else:
        frames = max(int(round(rng.uniform(0.4, 0.6) * cfg.track_frames)), 1)
    t = np.arange(frames, dtype=np.float64)

    height = np.full(frames, rng.uniform(0.15, 0.3))
    cy = np.full(frames, rng.uniform(0.55, 0.7))
    cx = np.full(frames, rng.uniform(0.1, 0.9))
    heading = np.full(frames, rng.normal(0.0, 0.1))
    frequency = np.full(frames, rng.uniform(*cfg.step_frequency))
    walk_amplitude = rng.uniform(*cfg.step_amplitude)
    amplitude = np.zeros(frames)
    event_frame = None

    if kind == PARALLEL or (kind == CROSSING and rng.random() < 0.5):
        growth = rng.uniform(-0.08, 0.08)
        height = height * np.exp(growth * t / fps)
        cx = cx + rng.uniform(-0.01, 0.01) * t / fps
        heading = heading + np.clip(np.cumsum(rng.normal(0.0, 0.01, size=frames)), -0.3, 0.3)
        amplitude = np.full(frames, walk_amplitude)

    if kind == CROSSING:
        lead_min = int(np.ceil(cfg.approach_seconds[1] * fps))
        event_frame = int(rng.integers(lead_min, frames))
        start = event_frame - int(round(rng.uniform(*cfg.approach_seconds) * fps))
        cx = np.full(frames, rng.uniform(0.1, 0.3))
        direction = 1.0
        if rng.random() < 0.5:
            cx, direction = 1.0 - cx, -1.0
        turn = _smoothstep((t - start) / (TURN_SECONDS * fps))
        ramp = _smoothstep((t - start) / (RAMP_SECONDS * fps))
        heading = heading + (direction * 0.45 * np.pi - heading) * turn
        lateral = direction * rng.uniform(0.08, 0.15) * ramp
        cx = cx + np.cumsum(lateral) / fps
        frequency = frequency * (1.0 + 0.3 * ramp)
        amplitude = amplitude + (walk_amplitude - amplitude) * ramp

    phase = rng.uniform(0.0, 2.0 * np.pi) + 2.0 * np.pi * np.cumsum(frequency) / fps
    clean = pose_frames(cx, cy, height, heading, phase, amplitude)
    keypoints = np.clip(clean + rng.normal(0.0, cfg.noise_std, size=clean.shape), 0.0, 1.0)
    return TrackRecord(
        track_id=track_id,
        fps=float(fps),
        keypoints=keypoints,
        bboxes=_boxes(keypoints, height),
        label=int(kind == CROSSING),
        event_frame=event_frame,
        ego_speed=_ego_speed(rng, frames) if cfg.speed_present else None,
    )


def synth_generate(cfg: SyntheticConfig) -> List[TrackRecord]:
    """Deterministic in cfg; track i depends only on (seed, i) and its label"""
    cfg.check()
    n_pos = int(round(cfg.positive_fraction * cfg.n_tracks))
    labels = np.random.default_rng(cfg.seed).permutation(
        np.array([1] * n_pos + [0] * (cfg.n_tracks - n_pos))
    )
    tracks = []
    for i, label in enumerate(labels):
        rng = np.random.default_rng([cfg.seed, i])
        if label == 1:
            kind = CROSSING
        else:
            kind = PARALLEL if rng.random() < 0.5 else STANDING
        tracks.append(generate_track(kind, f"synth-{cfg.seed}-{i:05d}", cfg, rng))
    logger.info(f"Generated {len(tracks)} synthetic tracks ({n_pos} crossing)")
    return tracks
