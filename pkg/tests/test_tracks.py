import pytest
import json

import numpy as np

from pedcross.data import dumps_tracks, load_tracks, parse_track, save_tracks
from pedcross.errors import TrackFormatError
from tests.conftest import make_track


def record(n_frames: int = 3, joints: int = 18, **overrides):
    data = {
        'track_id': "p1",
        'fps': 30,
        'label': 0,
        'event_frame': None,
        'frames': [
            {'keypoints': [[0.5, 0.5]] * joints, 'bbox': [0.4, 0.3, 0.6, 0.9], 'ego_speed': 12.5}
            for _ in range(n_frames)
        ],
    }
    data.update(overrides)
    return data


def write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding='utf-8')
    return path


def test_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert load_tracks(path) == []


def test_round_trip(tmp_path):
    tracks = [make_track("a", frames=20, seed=1), make_track("b", frames=30, label=1, event_frame=25, speed=False)]
    path = tmp_path / "tracks.jsonl"
    save_tracks(tracks, path)
    loaded = load_tracks(path, n_joints=18)
    assert [t.track_id for t in loaded] == ["a", "b"]
    for original, copy in zip(tracks, loaded):
        assert np.array_equal(original.keypoints, copy.keypoints)
        assert np.array_equal(original.bboxes, copy.bboxes)
        assert copy.label == original.label
        assert copy.event_frame == original.event_frame
    assert np.array_equal(tracks[0].ego_speed, loaded[0].ego_speed)
    assert loaded[1].ego_speed is None


def test_dumps_one_line_per_track():
    text = dumps_tracks([make_track("a", frames=5), make_track("b", frames=5)])
    assert text.count("\n") == 2
    assert json.loads(text.splitlines()[1])['track_id'] == "b"


def test_wrong_keypoint_count_names_frame(tmp_path):
    data = record()
    data['frames'][1]['keypoints'] = [[0.5, 0.5]] * 17
    path = write_lines(tmp_path / "bad.jsonl", [record(track_id="ok"), data])
    with pytest.raises(TrackFormatError) as exc:
        load_tracks(path, n_joints=18)
    assert exc.value.line == 2
    assert "frame 1" in str(exc.value)
    assert "17 keypoints" in str(exc.value)


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps(record()) + "\n{not json\n")
    with pytest.raises(TrackFormatError) as exc:
        load_tracks(path)
    assert exc.value.line == 2


def test_duplicate_track_id(tmp_path):
    path = write_lines(tmp_path / "dup.jsonl", [record(), record()])
    with pytest.raises(TrackFormatError) as exc:
        load_tracks(path)
    assert exc.value.field == 'track_id'


@pytest.mark.parametrize("overrides,field", [
    ({'label': 2}, 'label'),
    ({'label': True}, 'label'),
    ({'fps': "fast"}, 'fps'),
    ({'event_frame': 1.5}, 'event_frame'),
    ({'frames': []}, 'frames'),
])
def test_bad_fields(overrides, field):
    with pytest.raises(TrackFormatError) as exc:
        parse_track(record(**overrides), line=1)
    assert exc.value.field == field


def test_missing_field():
    data = record()
    del data['fps']
    with pytest.raises(TrackFormatError) as exc:
        parse_track(data, line=3)
    assert exc.value.field == 'fps'
    assert "line 3" in str(exc.value)


def test_unknown_field():
    with pytest.raises(TrackFormatError):
        parse_track(record(camera="front"), line=1)


def test_invariants_are_checked():
    with pytest.raises(TrackFormatError, match="event_frame is required"):
        parse_track(record(label=1), line=1)
    with pytest.raises(TrackFormatError, match="outside track"):
        parse_track(record(event_frame=10), line=1)

    data = record()
    data['frames'][0]['bbox'] = [0.6, 0.3, 0.4, 0.9]
    with pytest.raises(TrackFormatError, match="out of order"):
        parse_track(data, line=1)

    data = record()
    data['frames'][2]['keypoints'][0] = [1.5, 0.5]
    with pytest.raises(TrackFormatError, match=r"\[0, 1\]"):
        parse_track(data, line=1)


def test_speed_on_some_frames_only():
    data = record()
    del data['frames'][1]['ego_speed']
    with pytest.raises(TrackFormatError) as exc:
        parse_track(data, line=1)
    assert exc.value.field == 'frames[1].ego_speed'


def test_joint_count_inferred():
    track = parse_track(record(joints=5), line=1)
    assert track.num_joints == 5
    assert track.speed_present
    assert track.fps == 30.0


def test_save_rejects_invalid_track(tmp_path):
    track = make_track(frames=5)
    track.label = 1
    with pytest.raises(TrackFormatError):
        save_tracks([track], tmp_path / "out.jsonl")
    assert not (tmp_path / "out.jsonl").exists()
