import logging
from pathlib import Path
from typing import Mapping

from pedcross.fileio import atomic_write_text
from pedcross.models import GradCheckReport, Metrics, TrainingLog
from .json_encoder import dumps
from .types import GradCheckRecord, MetricsRecord

logger = logging.getLogger(__name__)


def create_metrics_report(metrics: Metrics, output_path: Path) -> None:
    record: MetricsRecord = metrics.to_dict()
    atomic_write_text(output_path, dumps(record))
    logger.info(f"Metrics written to {output_path}")


def create_training_log(log: TrainingLog, output_path: Path) -> None:
    """Header line followed by one JSON object per epoch"""
    lines = [dumps(line, indent=None) for line in log.to_lines()]
    atomic_write_text(output_path, "".join(lines))


def create_gradcheck_report(reports: Mapping[str, GradCheckReport], tolerance: float, output_path: Path) -> None:
    checks = {name: r.max_relative_error for name, r in reports.items()}
    failed = [name for name, r in reports.items() if not r.passed(tolerance)]
    record: GradCheckRecord = {
        "passed": not failed,
        "tolerance": tolerance,
        "checks": checks,
        "failed": failed,
    }
    atomic_write_text(output_path, dumps(record))
