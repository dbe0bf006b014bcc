from dataclasses import dataclass, field
import logging
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

from .ablation import ablate, ablation_suite
from .checkpoint import load_checkpoint_with_metadata, save_checkpoint
from .config import RunConfig
from .constants import STREAM_SPEED
from .data import build_windows, load_tracks, save_tracks, split, synth_generate
from .errors import ConfigError, StreamMissingError
from .evaluation import evaluate
from .features import context_stats, encode_windows
from .gradsuite import run_gradient_suite
from .models import (
    AblationRow, ContextStats, EncodedSample, GradCheckReport, Metrics, ModelConfig, ProfileReport,
    SplitConfig, SyntheticConfig, TrackRecord, WindowSpec,
)
from .network import CrossingNet
from .profiler import profile
from .training import TrainingResult, train

logger = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "val", "test", "all")


@dataclass
class PreparedData:
    """Encoded samples per split plus the training-split speed statistics"""
    train: List[EncodedSample] = field(default_factory=list)
    val: List[EncodedSample] = field(default_factory=list)
    test: List[EncodedSample] = field(default_factory=list)
    stats: Optional[ContextStats] = None

    def samples(self, name: str) -> List[EncodedSample]:
        if name == "all":
            return self.train + self.val + self.test
        return getattr(self, name)


def _check_tracks(tracks: Sequence[TrackRecord], window: WindowSpec, model: ModelConfig) -> None:
    fps = sorted({t.fps for t in tracks if t.fps != window.fps})
    if fps:
        raise ConfigError([f"tracks recorded at {fps} fps, window config expects {window.fps}"], source="window")
    joints = sorted({t.num_joints for t in tracks if t.num_joints != model.joints})
    if joints:
        raise ConfigError([f"tracks have {joints} joints, model expects {model.joints}"], source="model")
    if model.has_stream(STREAM_SPEED) and not all(t.speed_present for t in tracks):
        raise StreamMissingError(STREAM_SPEED)


def prepare(
    tracks: Sequence[TrackRecord],
    window: WindowSpec,
    split_cfg: SplitConfig,
    model: ModelConfig,
    stats: Optional[ContextStats] = None,
) -> PreparedData:
    """
    Split tracks, cut windows and encode them.

    Speed statistics come from the training split unless `stats` is given (as
    when evaluating a checkpoint). Tracks without speed skip standardization.
    """
    _check_tracks(tracks, window, model)
    train_tracks, val_tracks, test_tracks = split(tracks, split_cfg.fractions, split_cfg.seed)
    windows = {name: build_windows(part, window) for name, part in
               (("train", train_tracks), ("val", val_tracks), ("test", test_tracks))}
    if stats is None:
        stats = context_stats([w.context for w in windows["train"]])
    prepared = PreparedData(stats=stats, **{name: encode_windows(w, stats) for name, w in windows.items()})
    logger.info(f"Prepared {len(prepared.train)}/{len(prepared.val)}/{len(prepared.test)} windows "
                f"from {len(tracks)} tracks")
    return prepared


class CrossingAPI:
    """Main API class tying data, training, evaluation and profiling together"""

    def __init__(self, config: Optional[RunConfig] = None) -> None:
        self.config = config or RunConfig()
        self._progress_callback: Optional[Callable[[str], None]] = None

    def set_progress_callback(self, callback: Callable[[str], None]) -> None:
        """Set callback for progress updates"""
        self._progress_callback = callback

    def _progress(self, message: str) -> None:
        if self._progress_callback:
            self._progress_callback(message)

    def generate(self, out: Union[str, Path], synthetic: Optional[SyntheticConfig] = None) -> List[TrackRecord]:
        """Generate synthetic tracks and write them as a track file"""
        tracks = synth_generate(synthetic or self.config.synthetic)
        save_tracks(tracks, out)
        return tracks

    def prepare(self, data_path: Union[str, Path], stats: Optional[ContextStats] = None) -> PreparedData:
        tracks = load_tracks(data_path, n_joints=self.config.model.joints)
        return prepare(tracks, self.config.window, self.config.split, self.config.model, stats)

    def train(self, data_path: Union[str, Path], out: Union[str, Path]) -> TrainingResult:
        """Train on the training split of `data_path` and save a checkpoint to `out`"""
        data = self.prepare(data_path)
        self._progress(f"Training on {len(data.train)} windows")
        model = CrossingNet.build(self.config.model)
        result = train(model, data.train, self.config.train, data.val or None, progress=self._progress_callback)
        save_checkpoint(result.model, out, metadata={
            'context_stats': data.stats.to_dict() if data.stats else None,
            'window': self.config.window.to_dict(),
            'split': self.config.split.to_dict(),
            'train': self.config.train.to_dict(),
        })
        return result

    def evaluate(self, checkpoint: Union[str, Path], data_path: Union[str, Path], split_name: str = "test") -> Metrics:
        """Evaluate a checkpoint on one split of `data_path`, cut the way it was trained"""
        if split_name not in SPLIT_NAMES:
            raise ConfigError([f"split must be one of {SPLIT_NAMES}, got '{split_name}'"], source="evaluate")
        model, metadata = load_checkpoint_with_metadata(checkpoint)
        window = WindowSpec.from_dict(metadata['window']) if metadata.get('window') else self.config.window
        split_cfg = SplitConfig.from_dict(metadata['split']) if metadata.get('split') else self.config.split
        stats = ContextStats.from_dict(metadata['context_stats']) if metadata.get('context_stats') else None

        tracks = load_tracks(data_path, n_joints=model.config.joints)
        data = prepare(tracks, window, split_cfg, model.config, stats)
        samples = data.samples(split_name)
        self._progress(f"Evaluating on {len(samples)} {split_name} windows")
        return evaluate(model, samples)

    def profile(self, model: Optional[ModelConfig] = None, additional_cost_params: int = 0) -> ProfileReport:
        return profile(model or self.config.model, additional_cost_params)

    def ablate(
        self,
        data_path: Union[str, Path],
        suite: str = "table2",
        checkpoints: Optional[Mapping[str, Union[str, Path]]] = None,
    ) -> List[AblationRow]:
        """Train (or load) every variant of `suite` and score it on the test split"""
        data = self.prepare(data_path)
        variants = ablation_suite(suite, self.config.model)
        return ablate(variants, data.train, data.test, self.config.train, checkpoints,
                      val_samples=data.val or None, progress=self._progress_callback)

    def gradcheck(self, seed: int = 0) -> Dict[str, GradCheckReport]:
        self._progress("Running gradient suite")
        return run_gradient_suite(seed)
