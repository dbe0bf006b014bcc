import csv
import io
import logging
from pathlib import Path
from typing import List

from pedcross.fileio import atomic_write_text
from pedcross.models import ProfileReport
from .types import ProfileCsvRow

logger = logging.getLogger(__name__)

TOTAL_ROW = "total"


def profile_rows(report: ProfileReport) -> List[ProfileCsvRow]:
    return [{"name": r.name, "params": r.params, "flops": r.flops} for r in report.rows]


def create_profile_report(report: ProfileReport, output_path: Path) -> None:
    """Per-layer CSV (name, params, flops) closed by a totals row"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=["name", "params", "flops"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(profile_rows(report))
    writer.writerow({"name": TOTAL_ROW, "params": report.total_params, "flops": report.total_flops})
    atomic_write_text(output_path, buffer.getvalue())
    logger.info(f"Profile written to {output_path} ({len(report.rows)} rows)")
