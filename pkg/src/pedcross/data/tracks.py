"""
Track files hold one JSON object per line (UTF-8):

    {"track_id": str, "fps": float, "label": 0|1, "event_frame": int|null,
     "frames": [{"keypoints": [[x, y], ...], "bbox": [x1, y1, x2, y2],
                 "ego_speed": float (optional)}, ...]}

Coordinates are normalized to [0, 1] by the frame size. ego_speed is either on
every frame of a track or on none.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from pedcross.constants import BBOX_DIM, COORD_DIM
from pedcross.errors import TrackFormatError
from pedcross.fileio import atomic_write_text
from pedcross.models import TrackRecord

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ('track_id', 'fps', 'label', 'frames')


def _float_array(value: Any, shape: tuple, line: int, field: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise TrackFormatError("values must be numbers", line, field) from None
    if arr.shape != shape:
        raise TrackFormatError(f"expected shape {shape}, got {arr.shape}", line, field)
    return arr


def parse_track(data: Dict[str, Any], line: int, n_joints: Optional[int] = None) -> TrackRecord:
    """Build and validate one record; every rejection names its line and field"""
    if not isinstance(data, dict):
        raise TrackFormatError("record must be a JSON object", line)
    for name in REQUIRED_FIELDS:
        if name not in data:
            raise TrackFormatError("missing required field", line, name)
    unknown = sorted(set(data) - set(REQUIRED_FIELDS) - {'event_frame'})
    if unknown:
        raise TrackFormatError(f"unknown field(s) {unknown}", line)

    frames = data['frames']
    if not isinstance(frames, list) or not frames:
        raise TrackFormatError("must be a nonempty list", line, 'frames')
    first = frames[0].get('keypoints') if isinstance(frames[0], dict) else None
    joints = n_joints if n_joints is not None else (len(first) if isinstance(first, list) else 0)
    if joints < 1:
        raise TrackFormatError("cannot determine the joint count", line, 'frames[0].keypoints')

    has_speed = isinstance(frames[0], dict) and 'ego_speed' in frames[0]
    keypoints = np.empty((len(frames), joints, COORD_DIM))
    bboxes = np.empty((len(frames), BBOX_DIM))
    speed = np.empty(len(frames)) if has_speed else None
    for t, frame in enumerate(frames):
        where = f"frames[{t}]"
        if not isinstance(frame, dict):
            raise TrackFormatError("frame must be an object", line, where)
        if 'keypoints' not in frame or 'bbox' not in frame:
            raise TrackFormatError("frame needs 'keypoints' and 'bbox'", line, where)
        kp = frame['keypoints']
        if not isinstance(kp, list) or len(kp) != joints:
            count = len(kp) if isinstance(kp, list) else 'no'
            raise TrackFormatError(f"frame {t} has {count} keypoints, expected {joints}", line, f"{where}.keypoints")
        keypoints[t] = _float_array(kp, (joints, COORD_DIM), line, f"{where}.keypoints")
        bboxes[t] = _float_array(frame['bbox'], (BBOX_DIM,), line, f"{where}.bbox")
        if ('ego_speed' in frame) != has_speed:
            raise TrackFormatError("ego_speed must be on every frame or on none", line, f"{where}.ego_speed")
        if has_speed:
            value = frame['ego_speed']
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TrackFormatError("must be a number", line, f"{where}.ego_speed")
            speed[t] = float(value)

    label = data['label']
    if isinstance(label, bool) or label not in (0, 1):
        raise TrackFormatError(f"must be 0 or 1, got {label!r}", line, 'label')
    event = data.get('event_frame')
    if event is not None and (isinstance(event, bool) or not isinstance(event, int)):
        raise TrackFormatError(f"must be an integer or null, got {event!r}", line, 'event_frame')
    fps = data['fps']
    if isinstance(fps, bool) or not isinstance(fps, (int, float)):
        raise TrackFormatError(f"must be a number, got {fps!r}", line, 'fps')

    track = TrackRecord(
        track_id=str(data['track_id']),
        fps=float(fps),
        keypoints=keypoints,
        bboxes=bboxes,
        label=int(label),
        event_frame=event,
        ego_speed=speed,
    )
    if problems := track.validate():
        raise TrackFormatError("; ".join(problems), line)
    return track


def load_tracks(path: Union[str, Path], n_joints: Optional[int] = None) -> List[TrackRecord]:
    path = Path(path)
    tracks: List[TrackRecord] = []
    seen: Dict[str, int] = {}
    with path.open('r', encoding='utf-8') as f:
        for number, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            try:
                data = json.loads(raw)
            except json.JSONDecodeError as e:
                raise TrackFormatError(f"malformed JSON: {e.msg}", number) from e
            track = parse_track(data, number, n_joints)
            if track.track_id in seen:
                raise TrackFormatError(f"duplicate track_id '{track.track_id}' (first on line {seen[track.track_id]})",
                                       number, 'track_id')
            seen[track.track_id] = number
            tracks.append(track)
    logger.info(f"Loaded {len(tracks)} tracks from {path}")
    return tracks


def dumps_tracks(tracks: Sequence[TrackRecord]) -> str:
    return "".join(json.dumps(t.to_dict(), separators=(',', ':')) + "\n" for t in tracks)


def save_tracks(tracks: Sequence[TrackRecord], path: Union[str, Path]) -> None:
    for track in tracks:
        if problems := track.validate():
            raise TrackFormatError(f"track '{track.track_id}': " + "; ".join(problems))
    atomic_write_text(path, dumps_tracks(tracks))
    logger.info(f"Saved {len(tracks)} tracks to {path}")
