import pytest
from dataclasses import replace

from pedcross.ablation import ablate, ablation_suite
from pedcross.api import CrossingAPI
from pedcross.config import RunConfig
from pedcross.models import ModelConfig, SyntheticConfig, TrainConfig
from pedcross.network import CrossingNet
from pedcross.training import train
from tests.conftest import SMALL_MODEL, random_samples


def test_same_seed_same_checkpoint(run_config, tracks_file, tmp_path):
    config = replace(run_config, model=replace(SMALL_MODEL, dropout=0.5))
    first, second = tmp_path / "first.ckpt", tmp_path / "second.ckpt"
    log_a = CrossingAPI(config).train(tracks_file, first).log
    log_b = CrossingAPI(config).train(tracks_file, second).log
    assert first.read_bytes() == second.read_bytes()
    assert log_a.to_lines() == log_b.to_lines()


def test_full_batch_loss_falls_every_epoch():
    """One RAdam step per epoch, with the first lookahead sync held back past epoch 10"""
    samples = random_samples(SMALL_MODEL, [0, 1] * 8, seed=5)
    model = CrossingNet.build(SMALL_MODEL)
    cfg = TrainConfig(epochs=10, batch_size=len(samples), lr=1e-3, lookahead_k=10)
    losses = [e.train_loss for e in train(model, samples, cfg).log.epochs]
    assert len(losses) == 10
    assert all(later < earlier for earlier, later in zip(losses, losses[1:]))


@pytest.mark.slow
def test_overfits_small_fixture():
    samples = random_samples(SMALL_MODEL, [0, 1] * 8, seed=5)
    model = CrossingNet.build(SMALL_MODEL)
    log = train(model, samples, TrainConfig(epochs=200, batch_size=8, lr=0.03)).log
    losses = [e.train_loss for e in log.epochs]
    assert losses[9] < losses[0]
    assert min(losses) < 0.05


@pytest.mark.slow
def test_learns_synthetic_crossings(tmp_path):
    config = RunConfig(
        model=ModelConfig(
            branches=((1, 1), (2, 1)),
            blocks_per_branch=2,
            feature_maps=8,
            hidden=8,
            recurrent_blocks_per_stream=1,
            dropout=0.25,
        ),
        train=TrainConfig(epochs=30, batch_size=8, lr=1e-3),
        synthetic=SyntheticConfig(n_tracks=400, seed=11),
    ).check()
    api = CrossingAPI(config)
    data_path = tmp_path / "tracks.jsonl"
    api.generate(data_path)
    api.train(data_path, tmp_path / "model.ckpt")
    metrics = api.evaluate(tmp_path / "model.ckpt", data_path)
    assert metrics.f1 >= 0.85


@pytest.mark.slow
def test_parallel_branches_beat_single_branch(tmp_path):
    """Same data, seed and schedule; only the dilation branches differ"""
    base = ModelConfig(
        branches=((1, 1), (2, 1), (3, 1)),
        streams=("pseudo_image",),
        blocks_per_branch=2,
        feature_maps=8,
        hidden=8,
        recurrent_blocks_per_stream=1,
        dropout=0.25,
    )
    config = RunConfig(
        model=base,
        train=TrainConfig(epochs=30, batch_size=8, lr=1e-3),
        synthetic=SyntheticConfig(n_tracks=400, seed=11),
    ).check()
    api = CrossingAPI(config)
    data_path = tmp_path / "tracks.jsonl"
    api.generate(data_path)
    data = api.prepare(data_path)

    suite = ablation_suite("table2", base)
    pair = {name: suite[name] for name in ("default", "no_parallel_branches")}
    rows = ablate(pair, data.train, data.test, config.train, val_samples=data.val)
    assert [r.variant for r in rows] == ["default", "no_parallel_branches"]
    assert rows[0].params > rows[1].params
    assert rows[0].metrics.f1 > rows[1].metrics.f1
