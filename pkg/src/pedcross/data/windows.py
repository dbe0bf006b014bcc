import logging
from typing import List, Sequence

from pedcross.models import ContextFeatures, TrackRecord, Window, WindowSpec

logger = logging.getLogger(__name__)


def last_frames(track: TrackRecord, spec: WindowSpec) -> List[int]:
    """
    Last observed frame of every window cut from `track`.

    With an event: last frames span [event - tte_max, event - tte_min] in stride
    steps from the earliest. Without one: stride-spaced from the first full
    window, ending at least m frames before the track end.
    """
    m = spec.m
    if track.num_frames < m:
        return []
    if track.event_frame is not None:
        first = max(track.event_frame - spec.tte_max_frames, m - 1)
        last = min(track.event_frame - spec.tte_min_frames, track.num_frames - 1)
    else:
        first = m - 1
        last = track.num_frames - 1 - m
    return list(range(first, last + 1, spec.stride)) if first <= last else []


def sample_windows(track: TrackRecord, spec: WindowSpec) -> List[Window]:
    frames = last_frames(track, spec)
    if not frames:
        logger.warning(f"Track {track.track_id} ({track.num_frames} frames) yields no windows")
        return []
    windows = []
    for end in frames:
        start = end - spec.m + 1
        speed = None
        if track.ego_speed is not None:
            speed = track.ego_speed[start:end + 1].reshape(-1, 1).copy()
        windows.append(Window(
            track_id=track.track_id,
            pose=track.keypoints[start:end + 1].copy(),
            context=ContextFeatures(boxes=track.bboxes[start:end + 1].copy(), speed=speed),
            label=track.label,
            last_frame=end,
        ))
    return windows


def build_windows(tracks: Sequence[TrackRecord], spec: WindowSpec) -> List[Window]:
    windows: List[Window] = []
    for track in tracks:
        windows.extend(sample_windows(track, spec))
    logger.debug(f"Cut {len(windows)} windows from {len(tracks)} tracks")
    return windows
