import csv
import io
import logging
from pathlib import Path
from typing import List, Sequence

from pedcross.fileio import atomic_write_text
from pedcross.models import AblationRow
from .types import AblationCsvRow

FIELDS = ["variant", "params", "acc", "auc", "f1", "precision", "recall", "tp", "fp", "tn", "fn"]

logger = logging.getLogger(__name__)


def ablation_rows(rows: Sequence[AblationRow]) -> List[AblationCsvRow]:
    return [row.to_dict() for row in rows]


def create_ablation_report(rows: Sequence[AblationRow], output_path: Path) -> None:
    """One CSV row per variant; an undefined AUC is left empty"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in ablation_rows(rows):
        writer.writerow({k: ("" if row[k] is None else row[k]) for k in FIELDS})
    atomic_write_text(output_path, buffer.getvalue())
    logger.info(f"Ablation comparison written to {output_path} ({len(rows)} variants)")
