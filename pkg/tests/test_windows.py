import pytest
import numpy as np

from pedcross.data import build_windows, last_frames, sample_windows
from pedcross.models import WindowSpec
from tests.conftest import make_track


def test_event_windows():
    """Last observed frame falls 1 to 2 seconds before the event"""
    track = make_track(frames=250, label=1, event_frame=200)
    spec = WindowSpec()
    assert len(range(200 - 60, 200 - 30 + 1)) == 31
    assert last_frames(track, spec) == [140, 148, 156, 164]
    assert len(last_frames(track, WindowSpec(stride=1))) == 31


def test_window_contents():
    track = make_track(frames=250, label=1, event_frame=200)
    windows = sample_windows(track, WindowSpec())
    first = windows[0]
    assert first.last_frame == 140
    assert first.label == 1
    assert first.track_id == track.track_id
    assert first.pose.shape == (16, 18, 2)
    assert np.array_equal(first.pose, track.keypoints[125:141])
    assert np.array_equal(first.context.boxes, track.bboxes[125:141])
    assert first.context.speed.shape == (16, 1)


def test_non_event_windows():
    track = make_track(frames=100, label=0)
    frames = last_frames(track, WindowSpec())
    assert frames == list(range(15, 84, 8))
    assert frames[-1] <= 100 - 1 - 16


def test_short_track():
    assert sample_windows(make_track(frames=15), WindowSpec()) == []


def test_event_too_early():
    """An event before the first full window yields nothing"""
    track = make_track(frames=100, label=1, event_frame=20)
    assert last_frames(track, WindowSpec()) == []


def test_event_window_clamped_to_track_start():
    track = make_track(frames=100, label=1, event_frame=60)
    frames = last_frames(track, WindowSpec())
    assert frames[0] == 15
    assert frames[-1] <= 30


def test_windows_without_speed():
    windows = sample_windows(make_track(frames=60, speed=False), WindowSpec())
    assert windows
    assert all(w.context.speed is None for w in windows)


def test_build_windows_keeps_track_order():
    tracks = [make_track("a", frames=60, seed=1), make_track("b", frames=60, seed=2)]
    windows = build_windows(tracks, WindowSpec())
    ids = [w.track_id for w in windows]
    assert ids == sorted(ids)
    assert set(ids) == {"a", "b"}


def test_other_frame_rates():
    track = make_track(frames=200, label=1, event_frame=150, fps=15.0)
    assert last_frames(track, WindowSpec(fps=15.0)) == [120, 128]
