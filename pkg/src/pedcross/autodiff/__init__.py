"""
Reverse-mode automatic differentiation over numpy float64 arrays
"""

from .tensor import Function, Tensor, is_grad_enabled, no_grad
from . import ops
from .conv import conv2d, max_pool2d
from .recurrent import gru_sequence
from .gradcheck import gradient_check, numeric_gradient, relative_error

__all__ = [
    'Function',
    'Tensor',
    'is_grad_enabled',
    'no_grad',
    'ops',
    'conv2d',
    'max_pool2d',
    'gru_sequence',
    'gradient_check',
    'numeric_gradient',
    'relative_error',
]
