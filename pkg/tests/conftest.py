import pytest
import logging
from pathlib import Path
from typing import List, Optional, Sequence
import sys

import numpy as np

from pedcross.api import CrossingAPI
from pedcross.config import RunConfig
from pedcross.data import save_tracks, synth_generate
from pedcross.models import (
    EncodedSample, ModelConfig, SplitConfig, SyntheticConfig, TrackRecord, TrainConfig, WindowSpec,
)

# Add parent directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent))


# Core test configuration
ROOT_DIR = Path(__file__).parent.parent
CLI_PATH = ROOT_DIR / 'tools' / 'pedcross_cli.py'

# Full-size inputs (16 frames, 18 joints) with the narrowest layers
SMALL_MODEL = ModelConfig(
    branches=((1, 1), (2, 1)),
    blocks_per_branch=1,
    feature_maps=4,
    hidden=4,
    recurrent_blocks_per_stream=1,
    dropout=0.0,
)

SMALL_SYNTHETIC = SyntheticConfig(n_tracks=12, seed=3, track_frames=120)


def make_track(
    track_id: str = "t0",
    frames: int = 100,
    label: int = 0,
    event_frame: Optional[int] = None,
    joints: int = 18,
    speed: bool = True,
    fps: float = 30.0,
    seed: int = 0,
) -> TrackRecord:
    """Random but valid track"""
    rng = np.random.default_rng(seed)
    corner = rng.uniform(0.1, 0.4, size=(frames, 2))
    return TrackRecord(
        track_id=track_id,
        fps=fps,
        keypoints=rng.uniform(0.0, 1.0, size=(frames, joints, 2)),
        bboxes=np.concatenate([corner, corner + 0.2], axis=1),
        label=label,
        event_frame=event_frame,
        ego_speed=rng.uniform(0.0, 30.0, size=frames) if speed else None,
    )


def random_samples(config: ModelConfig, labels: Sequence[int], seed: int = 0) -> List[EncodedSample]:
    """Encoded samples with random contents shaped for `config`"""
    rng = np.random.default_rng(seed)
    m = config.frames
    return [
        EncodedSample(
            label=int(label),
            pseudo_image=rng.uniform(0.0, 1.0, size=(m, config.joints, config.coord_dim)),
            jcd=rng.uniform(0.0, 1.0, size=(m, config.jcd_dim)),
            bbox=rng.uniform(0.0, 1.0, size=(m, 4)),
            speed=rng.normal(size=(m, 1)),
            track_id=f"sample-{i}",
        )
        for i, label in enumerate(labels)
    ]


@pytest.fixture(autouse=True)
def setup_logging() -> None:
    """Configure logging for tests"""
    logging.basicConfig(
        level=logging.DEBUG,
        format='%(asctime)s [%(levelname)s] %(message)s',
        handlers=[logging.StreamHandler()]
    )

@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)

@pytest.fixture
def tiny_config() -> ModelConfig:
    """Smallest buildable model"""
    return ModelConfig.tiny()

@pytest.fixture
def small_config() -> ModelConfig:
    """Narrow model over full-size windows"""
    return SMALL_MODEL

@pytest.fixture
def synthetic_tracks() -> List[TrackRecord]:
    return synth_generate(SMALL_SYNTHETIC)

@pytest.fixture
def tracks_file(tmp_path: Path, synthetic_tracks) -> Path:
    """Synthetic track file on disk"""
    path = tmp_path / "tracks.jsonl"
    save_tracks(synthetic_tracks, path)
    return path

@pytest.fixture
def run_config() -> RunConfig:
    """Short run over the small model and synthetic fixture"""
    return RunConfig(
        model=SMALL_MODEL,
        train=TrainConfig(epochs=2, batch_size=8, lr=1e-3),
        window=WindowSpec(),
        synthetic=SMALL_SYNTHETIC,
        split=SplitConfig(),
    ).check()

@pytest.fixture
def api(run_config):
    """Provide API instance"""
    return CrossingAPI(run_config)

__all__ = [
    'rng', 'tiny_config', 'small_config', 'synthetic_tracks', 'tracks_file', 'run_config', 'api',
    'make_track', 'random_samples', 'SMALL_MODEL', 'SMALL_SYNTHETIC', 'ROOT_DIR', 'CLI_PATH',
]
