import pytest
import csv
import json
from pathlib import Path

import numpy as np

from pedcross.models import AblationRow, EpochRecord, GradCheckReport, Metrics, TrainingLog
from pedcross.profiler import profile
from reports.ablation_report import create_ablation_report
from reports.json_encoder import dumps
from reports.metrics_report import create_gradcheck_report, create_metrics_report, create_training_log
from reports.profile_report import create_profile_report
from tests.conftest import SMALL_MODEL

METRICS = Metrics(acc=0.8, auc=None, f1=0.8, precision=0.6667, recall=1.0, tp=2, fp=1, tn=2, fn=0)


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_json_encoder_types():
    data = {'n': np.int64(3), 'x': np.float32(0.5), 'a': np.arange(3), 'p': Path("a/b"), 'm': METRICS}
    decoded = json.loads(dumps(data))
    assert decoded['n'] == 3
    assert decoded['x'] == 0.5
    assert decoded['a'] == [0, 1, 2]
    assert decoded['p'] == str(Path("a/b"))
    assert decoded['m']['tp'] == 2


def test_metrics_report(tmp_path):
    out = tmp_path / "metrics.json"
    create_metrics_report(METRICS, out)
    record = json.loads(out.read_text())
    assert record['auc'] is None
    assert record['f1'] == 0.8


def test_profile_report(tmp_path):
    report = profile(SMALL_MODEL)
    out = tmp_path / "profile.csv"
    create_profile_report(report, out)
    rows = read_csv(out)
    assert len(rows) == len(report.rows) + 1
    assert rows[0]['name'] == report.rows[0].name
    assert rows[-1] == {'name': "total", 'params': str(report.total_params), 'flops': str(report.total_flops)}


def test_ablation_report(tmp_path):
    out = tmp_path / "ablation.csv"
    create_ablation_report([AblationRow("default", 1234, METRICS), AblationRow("gru", 999, METRICS)], out)
    rows = read_csv(out)
    assert [r['variant'] for r in rows] == ["default", "gru"]
    assert rows[0]['params'] == "1234"
    assert rows[0]['auc'] == ""


def test_training_log(tmp_path):
    out = tmp_path / "train.log.jsonl"
    log = TrainingLog(header={'seed': 0}, epochs=[EpochRecord(1, 0.7), EpochRecord(2, 0.6, 0.5, 0.5, 0.4)])
    create_training_log(log, out)
    lines = [json.loads(line) for line in out.read_text().splitlines()]
    assert lines[0] == {'header': {'seed': 0}}
    assert lines[2]['val_f1'] == 0.4
    assert lines[1]['val_acc'] is None


def test_gradcheck_report(tmp_path):
    out = tmp_path / "grad.json"
    reports = {'conv': GradCheckReport(1e-8), 'gru': GradCheckReport(1e-3)}
    create_gradcheck_report(reports, 1e-4, out)
    record = json.loads(out.read_text())
    assert record['passed'] is False
    assert record['failed'] == ["gru"]
    assert record['checks']['conv'] == pytest.approx(1e-8)
