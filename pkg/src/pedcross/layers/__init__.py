"""
Parameterized layers. Every layer is a function of (input, params[, mode, rng])
over batched tensors.
"""

from .params import (
    BatchNormState, CBAMParams, ConvParams, DenseParams, GRUCellParams, ModalityAttentionParams,
    ParameterStore, RecurrentBlockParams, SEParams, TemporalAttentionParams, reduced_width,
)
from .dense import batch_norm, dense, dropout
from .conv import atrous_conv2d, max_pool2d
from .attention import (
    cbam, channel_gate, modality_attention, modality_weights, se_block, spatial_gate,
    temporal_attention, temporal_weights,
)
from .recurrent import bigru_block, gru_block, gru_cell, gru_layer, recurrent_block, ugru_block

__all__ = [
    'BatchNormState', 'CBAMParams', 'ConvParams', 'DenseParams', 'GRUCellParams',
    'ModalityAttentionParams', 'ParameterStore', 'RecurrentBlockParams', 'SEParams',
    'TemporalAttentionParams', 'reduced_width',
    'batch_norm', 'dense', 'dropout',
    'atrous_conv2d', 'max_pool2d',
    'cbam', 'channel_gate', 'modality_attention', 'modality_weights', 'se_block', 'spatial_gate',
    'temporal_attention', 'temporal_weights',
    'bigru_block', 'gru_block', 'gru_cell', 'gru_layer', 'recurrent_block', 'ugru_block',
]
