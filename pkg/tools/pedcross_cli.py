import argparse
import logging
import os
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from pedcross import __version__
from pedcross.ablation import SUITES
from pedcross.api import CrossingAPI
from pedcross.config import RunConfig, load_config
from pedcross.constants import LOG_LEVEL_ENV
from pedcross.errors import ConfigError, GradCheckError, PedcrossError
from pedcross.fileio import atomic_write_text
from pedcross.gradsuite import DEFAULT_TOLERANCE, failed_checks
from pedcross.models import RunManifest
from reports.ablation_report import create_ablation_report
from reports.json_encoder import dumps
from reports.metrics_report import create_gradcheck_report, create_metrics_report, create_training_log
from reports.profile_report import create_profile_report

logger = logging.getLogger("pedcross.cli")


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def log_path(out: Path) -> Path:
    return out.with_name(out.name + ".log.jsonl")


class CommandRunner:
    """Runs one command and records its manifest"""

    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        self.started = time.perf_counter()
        self.started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.config = self._load_config()
        self.api = CrossingAPI(self.config)
        self.api.set_progress_callback(self._progress_callback)

    def _load_config(self) -> RunConfig:
        config = load_config(getattr(self.args, "config", None))
        if getattr(self.args, "seed", None) is not None:
            config = config.with_seed(self.args.seed)
        if getattr(self.args, "tracks", None) is not None:
            config = replace(config, synthetic=replace(config.synthetic, n_tracks=self.args.tracks)).check()
        return config

    def _progress_callback(self, msg: str) -> None:
        print(f"  {msg}", flush=True)

    def write_manifest(self, out: Path, seed: Optional[int], artifacts: Dict[str, Path]) -> Path:
        manifest = RunManifest(
            command=self.args.command,
            config=self.config.to_dict(),
            seed=seed,
            artifacts={name: str(path) for name, path in artifacts.items()},
            wall_clock_seconds=round(time.perf_counter() - self.started, 3),
            started_at=self.started_at,
            version=__version__,
        )
        path = manifest_path(out)
        atomic_write_text(path, dumps(manifest.to_dict()))
        return path

    def gen(self) -> None:
        synthetic = self.config.synthetic
        tracks = self.api.generate(self.args.out, synthetic)
        print(f"Wrote {len(tracks)} tracks to {self.args.out}")
        self.write_manifest(self.args.out, synthetic.seed, {'tracks': self.args.out})

    def train(self) -> None:
        result = self.api.train(self.args.data, self.args.out)
        epochs = log_path(self.args.out)
        create_training_log(result.log, epochs)
        print(f"Checkpoint written to {self.args.out}")
        self.write_manifest(self.args.out, self.config.train.seed,
                            {'data': self.args.data, 'checkpoint': self.args.out, 'log': epochs})

    def eval(self) -> None:
        metrics = self.api.evaluate(self.args.ckpt, self.args.data, self.args.split)
        create_metrics_report(metrics, self.args.metrics_out)
        auc = "n/a" if metrics.auc is None else f"{metrics.auc:.3f}"
        print(f"acc {metrics.acc:.3f}  auc {auc}  f1 {metrics.f1:.3f}  "
              f"precision {metrics.precision:.3f}  recall {metrics.recall:.3f}")
        self.write_manifest(self.args.metrics_out, None,
                            {'checkpoint': self.args.ckpt, 'data': self.args.data, 'metrics': self.args.metrics_out})

    def profile(self) -> None:
        report = self.api.profile(additional_cost_params=self.args.additional_cost_params)
        create_profile_report(report, self.args.out)
        print(f"Parameters: {report.total_params:,}  FLOPS: {report.total_flops:,}  "
              f"weights: {report.weight_bytes / 1e6:.2f} MB")
        self.write_manifest(self.args.out, None, {'profile': self.args.out})

    def ablate(self) -> None:
        checkpoints = _parse_checkpoints(self.args.checkpoint) if self.args.checkpoint else None
        rows = self.api.ablate(self.args.data, self.args.suite, checkpoints)
        create_ablation_report(rows, self.args.out)
        for row in rows:
            print(f"{row.variant:<22} params {row.params:>9,}  f1 {row.metrics.f1:.3f}  acc {row.metrics.acc:.3f}")
        self.write_manifest(self.args.out, self.config.train.seed, {'data': self.args.data, 'ablation': self.args.out})

    def gradcheck(self) -> None:
        reports = self.api.gradcheck(self.args.seed or 0)
        create_gradcheck_report(reports, DEFAULT_TOLERANCE, self.args.out)
        for name, report in reports.items():
            status = "ok" if report.passed(DEFAULT_TOLERANCE) else "FAILED"
            print(f"{name:<22} {report.max_relative_error:.3e}  {status}")
        self.write_manifest(self.args.out, self.args.seed or 0, {'gradcheck': self.args.out})
        if failed := failed_checks(reports, DEFAULT_TOLERANCE):
            raise GradCheckError(f"gradcheck: {len(failed)} check(s) above {DEFAULT_TOLERANCE}: {', '.join(failed)}")


def _parse_checkpoints(values: List[str]) -> Dict[str, Path]:
    checkpoints: Dict[str, Path] = {}
    for value in values:
        variant, sep, path = value.partition("=")
        if not sep or not variant or not path:
            raise ConfigError([f"--checkpoint expects VARIANT=PATH, got '{value}'"], source="cli")
        checkpoints[variant] = Path(path)
    return checkpoints


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Pedestrian crossing predictor: data, training, evaluation, profiling")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate synthetic tracks")
    gen.add_argument("--config", type=Path, help="YAML run config")
    gen.add_argument("--out", type=Path, required=True, help="Track file to write")
    gen.add_argument("--seed", type=int, help="Seed (overrides config)")
    gen.add_argument("--tracks", type=int, help="Number of tracks (overrides config)")

    train = sub.add_parser("train", help="Train a model and save a checkpoint")
    train.add_argument("--config", type=Path, help="YAML run config")
    train.add_argument("--data", type=Path, required=True, help="Track file")
    train.add_argument("--out", type=Path, required=True, help="Checkpoint to write")
    train.add_argument("--seed", type=int, help="Seed (overrides config)")

    ev = sub.add_parser("eval", help="Evaluate a checkpoint")
    ev.add_argument("--ckpt", type=Path, required=True, help="Checkpoint to load")
    ev.add_argument("--data", type=Path, required=True, help="Track file")
    ev.add_argument("--metrics-out", type=Path, required=True, help="Metrics JSON to write")
    ev.add_argument("--split", choices=["train", "val", "test", "all"], default="test",
                    help="Split of the track file to score")

    profile = sub.add_parser("profile", help="Write a per-layer parameter/FLOPS CSV")
    profile.add_argument("--config", type=Path, help="YAML run config")
    profile.add_argument("--out", type=Path, required=True, help="CSV to write")
    profile.add_argument("--additional-cost-params", type=int, default=0,
                         help="Parameters of an external pose extractor, added to the reported total")

    ablate = sub.add_parser("ablate", help="Compare architecture variants")
    ablate.add_argument("--suite", choices=sorted(SUITES), default="table2",
                        help="Variant suite (architecture is an alias of table2)")
    ablate.add_argument("--config", type=Path, help="YAML run config")
    ablate.add_argument("--data", type=Path, required=True, help="Track file")
    ablate.add_argument("--out", type=Path, required=True, help="CSV to write")
    ablate.add_argument("--seed", type=int, help="Seed (overrides config)")
    ablate.add_argument("--checkpoint", action="append", metavar="VARIANT=PATH",
                        help="Load a variant instead of training it (repeatable, all variants required)")

    grad = sub.add_parser("gradcheck", help="Run the layer gradient suite")
    grad.add_argument("--out", type=Path, default=Path("gradcheck.json"), help="JSON report to write")
    grad.add_argument("--seed", type=int, help="Seed for the random cases")
    return parser


def configure_logging(verbose: bool) -> None:
    level: Any = logging.DEBUG if verbose else os.environ.get(LOG_LEVEL_ENV, "WARNING").upper()
    try:
        logging.basicConfig(level=level, format='%(asctime)s [%(levelname)s] %(name)s: %(message)s')
    except ValueError:
        logging.basicConfig(level=logging.WARNING)
        logger.warning(f"Ignoring unknown {LOG_LEVEL_ENV}={os.environ.get(LOG_LEVEL_ENV)}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        runner = CommandRunner(args)
        getattr(runner, args.command)()
    except KeyboardInterrupt:
        print("\nProcess terminated by user", file=sys.stderr)
        return 1
    except (PedcrossError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
