import pytest
from dataclasses import replace

import numpy as np

from pedcross.data import build_windows, dumps_tracks, generate_track, synth_generate
from pedcross.data.synthetic import CROSSING, PARALLEL, STANDING
from pedcross.errors import ConfigError
from pedcross.evaluation import roc_auc
from pedcross.features import jcd
from pedcross.models import SyntheticConfig, WindowSpec

RIGHT_HIP, LEFT_HIP = 8, 11


def test_same_seed_same_bytes():
    cfg = SyntheticConfig(n_tracks=10, seed=4)
    assert dumps_tracks(synth_generate(cfg)) == dumps_tracks(synth_generate(cfg))
    assert dumps_tracks(synth_generate(cfg)) != dumps_tracks(synth_generate(replace(cfg, seed=5)))


def test_track_count_and_labels():
    tracks = synth_generate(SyntheticConfig(n_tracks=20, positive_fraction=0.25))
    assert len(tracks) == 20
    assert sum(t.label for t in tracks) == 5
    assert len({t.track_id for t in tracks}) == 20
    assert all(t.validate() == [] for t in tracks)


def test_values_in_unit_range():
    for track in synth_generate(SyntheticConfig(n_tracks=20, noise_std=0.05)):
        assert 0.0 <= track.keypoints.min() and track.keypoints.max() <= 1.0
        assert 0.0 <= track.bboxes.min() and track.bboxes.max() <= 1.0
        assert track.num_joints == 18


def test_crossing_tracks_have_events():
    cfg = SyntheticConfig(n_tracks=10)
    for track in synth_generate(cfg):
        if track.label == 1:
            assert track.event_frame is not None
            assert track.num_frames == cfg.track_frames
            assert len(build_windows([track], WindowSpec())) > 0
        else:
            assert track.event_frame is None


def test_standing_pedestrian_is_static():
    cfg = SyntheticConfig(noise_std=0.0)
    track = generate_track(STANDING, "still", cfg, np.random.default_rng(0))
    distances = jcd(track.keypoints)
    assert np.array_equal(distances, np.repeat(distances[:1], len(distances), axis=0))
    assert track.label == 0


@pytest.mark.parametrize("kind", [CROSSING, PARALLEL, STANDING])
def test_kinds(kind):
    track = generate_track(kind, kind, SyntheticConfig(), np.random.default_rng(1))
    assert track.label == int(kind == CROSSING)
    assert track.validate() == []


def test_without_speed():
    tracks = synth_generate(SyntheticConfig(n_tracks=4, speed_present=False))
    assert not any(t.speed_present for t in tracks)


def test_lateral_motion_separates_crossers():
    """Hip displacement across each window ranks crossing windows first"""
    tracks = synth_generate(SyntheticConfig(n_tracks=60, noise_std=0.0, seed=2))
    windows = build_windows(tracks, WindowSpec())
    hips = [0.5 * (w.pose[:, RIGHT_HIP, 0] + w.pose[:, LEFT_HIP, 0]) for w in windows]
    scores = [abs(h[-1] - h[0]) for h in hips]
    assert roc_auc(scores, [w.label for w in windows]) >= 0.7


def test_config_is_checked():
    with pytest.raises(ConfigError):
        synth_generate(SyntheticConfig(n_tracks=1))
    with pytest.raises(ConfigError):
        synth_generate(SyntheticConfig(track_frames=50))
    with pytest.raises(ValueError):
        generate_track("jogging", "x", SyntheticConfig(), np.random.default_rng(0))
