from .loss import class_weights, weighted_bce
from .optimizer import Lookahead, RAdam, Ranger, lookahead_sync, radam_update, rectification
from .trainer import TrainingResult, train

__all__ = [
    'class_weights',
    'weighted_bce',
    'Lookahead',
    'RAdam',
    'Ranger',
    'lookahead_sync',
    'radam_update',
    'rectification',
    'TrainingResult',
    'train',
]
