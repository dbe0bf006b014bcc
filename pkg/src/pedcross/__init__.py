"""
Pose-based pedestrian crossing predictor built on a small numpy autodiff stack
"""

__version__ = "0.1.0"

from .api import CrossingAPI
from .config import RunConfig, load_config
from .models import Metrics, ModelConfig, TrackRecord, TrainConfig
from .network import CrossingNet

__all__ = [
    'CrossingAPI',
    'CrossingNet',
    'RunConfig',
    'load_config',
    'Metrics',
    'ModelConfig',
    'TrackRecord',
    'TrainConfig',
]
