from .splits import split, track_hash
from .synthetic import generate_track, synth_generate
from .tracks import dumps_tracks, load_tracks, parse_track, save_tracks
from .windows import build_windows, last_frames, sample_windows

__all__ = [
    'split', 'track_hash',
    'generate_track', 'synth_generate',
    'dumps_tracks', 'load_tracks', 'parse_track', 'save_tracks',
    'build_windows', 'last_frames', 'sample_windows',
]
