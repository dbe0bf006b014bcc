import pytest
import csv
import json
from textwrap import dedent

import pedcross_cli
from pedcross.checkpoint import load_checkpoint

SMALL_RUN = """
    model:
      branches: [[1, 1], [2, 1]]
      blocks_per_branch: 1
      feature_maps: 4
      hidden: 4
      recurrent_blocks_per_stream: 1
      dropout: 0.0
    train:
      epochs: 1
      batch_size: 8
      lr: 1e-3
    synthetic:
      n_tracks: 12
      track_frames: 120
      seed: 3
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(dedent(SMALL_RUN), encoding='utf-8')
    return path


@pytest.fixture
def data_file(tmp_path, config_file):
    path = tmp_path / "tracks.jsonl"
    assert pedcross_cli.main(["gen", "--config", str(config_file), "--out", str(path)]) == 0
    return path


def test_gen_writes_tracks_and_manifest(tmp_path):
    out = tmp_path / "tracks.jsonl"
    assert pedcross_cli.main(["gen", "--out", str(out), "--tracks", "20", "--seed", "5"]) == 0
    assert len(out.read_text().splitlines()) == 20
    manifest = json.loads((tmp_path / "tracks.jsonl.manifest.json").read_text())
    assert manifest['command'] == "gen"
    assert manifest['seed'] == 5
    assert manifest['config']['synthetic']['n_tracks'] == 20
    assert manifest['artifacts']['tracks'] == str(out)


def test_gen_is_reproducible(tmp_path):
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (first, second):
        pedcross_cli.main(["gen", "--out", str(out), "--tracks", "6", "--seed", "2"])
    assert first.read_bytes() == second.read_bytes()


def test_missing_out_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        pedcross_cli.main(["gen"])
    assert exc.value.code == 2


def test_profile_totals_row(tmp_path):
    out = tmp_path / "profile.csv"
    assert pedcross_cli.main(["profile", "--out", str(out)]) == 0
    with open(out, newline="") as f:
        rows = list(csv.DictReader(f))
    total = rows[-1]
    assert total['name'] == "total"
    assert int(total['params']) == sum(int(r['params']) for r in rows[:-1])
    assert int(total['flops']) == sum(int(r['flops']) for r in rows[:-1])
    assert int(total['params']) == 619_616


def test_train_then_eval(tmp_path, config_file, data_file):
    ckpt = tmp_path / "model.ckpt"
    assert pedcross_cli.main(["train", "--config", str(config_file), "--data", str(data_file),
                              "--out", str(ckpt)]) == 0
    assert load_checkpoint(ckpt).config.hidden == 4
    log_lines = (tmp_path / "model.ckpt.log.jsonl").read_text().splitlines()
    assert 'header' in json.loads(log_lines[0])
    assert json.loads(log_lines[1])['epoch'] == 1
    assert (tmp_path / "model.ckpt.manifest.json").exists()

    metrics_out = tmp_path / "metrics.json"
    assert pedcross_cli.main(["eval", "--ckpt", str(ckpt), "--data", str(data_file),
                              "--metrics-out", str(metrics_out)]) == 0
    metrics = json.loads(metrics_out.read_text())
    assert {'acc', 'auc', 'f1', 'precision', 'recall'} <= set(metrics)


def test_bad_config_fails(tmp_path, capsys):
    config = tmp_path / "bad.yaml"
    config.write_text("preset: kitti\n")
    assert pedcross_cli.main(["gen", "--config", str(config), "--out", str(tmp_path / "x.jsonl")]) == 1
    assert "preset" in capsys.readouterr().err


def test_missing_checkpoint_fails(tmp_path, data_file):
    code = pedcross_cli.main(["eval", "--ckpt", str(tmp_path / "none.ckpt"), "--data", str(data_file),
                              "--metrics-out", str(tmp_path / "m.json")])
    assert code == 1
    assert not (tmp_path / "m.json").exists()


def test_bad_checkpoint_argument(tmp_path, data_file):
    code = pedcross_cli.main(["ablate", "--data", str(data_file), "--out", str(tmp_path / "a.csv"),
                              "--checkpoint", "default"])
    assert code == 1


@pytest.mark.parametrize("suite", ["table2", "architecture"])
def test_ablate_suite_names(tmp_path, suite):
    args = pedcross_cli.build_parser().parse_args(
        ["ablate", "--suite", suite, "--data", str(tmp_path / "t.jsonl"), "--out", str(tmp_path / "a.csv")]
    )
    assert args.suite == suite


def test_ablate_suite_defaults_to_table2(tmp_path):
    args = pedcross_cli.build_parser().parse_args(
        ["ablate", "--data", str(tmp_path / "t.jsonl"), "--out", str(tmp_path / "a.csv")]
    )
    assert args.suite == "table2"
