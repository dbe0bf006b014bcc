import hashlib
import logging
from typing import List, Sequence, Tuple

from pedcross.errors import ConfigError, TrackFormatError
from pedcross.models import SplitConfig, TrackRecord

logger = logging.getLogger(__name__)


def track_hash(track_id: str, seed: int) -> int:
    digest = hashlib.sha256(f"{seed}:{track_id}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


def split(
    tracks: Sequence[TrackRecord],
    fractions: Tuple[float, float, float] = (0.7, 0.15, 0.15),
    seed: int = 0,
) -> Tuple[List[TrackRecord], List[TrackRecord], List[TrackRecord]]:
    """
    Partition tracks into (train, val, test).

    Tracks are ranked by a hash of (seed, track_id) and cut at the requested
    fractions, so sizes match the fractions up to rounding and the result does
    not depend on input order. Windows follow their track.
    """
    if problems := SplitConfig(tuple(fractions), seed).validate():
        raise ConfigError(problems, source="split")
    if not tracks:
        raise TrackFormatError("cannot split an empty track list")
    ranked = sorted(tracks, key=lambda t: (track_hash(t.track_id, seed), t.track_id))
    n = len(ranked)
    n_train = int(round(fractions[0] * n))
    n_val = min(int(round(fractions[1] * n)), n - n_train)
    train, val, test = ranked[:n_train], ranked[n_train:n_train + n_val], ranked[n_train + n_val:]
    logger.debug(f"Split {n} tracks into {len(train)}/{len(val)}/{len(test)}")
    return train, val, test
