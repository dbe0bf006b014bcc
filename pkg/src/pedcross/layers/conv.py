import logging

from pedcross.autodiff import Tensor, conv2d, max_pool2d as _max_pool2d, ops
from pedcross.constants import POOL_WINDOW
from pedcross.errors import ShapeError
from pedcross.layers.params import ConvParams

logger = logging.getLogger(__name__)


def atrous_conv2d(x: Tensor, p: ConvParams, activation: str = "leaky_relu") -> Tensor:
    """Same-padded dilated convolution over a (B, C, H, W) batch, then the activation"""
    if x.ndim != 4:
        raise ShapeError(f"atrous_conv2d: expects (B, C, H, W), got {x.shape}")
    if x.shape[1] != p.in_channels:
        raise ShapeError(f"atrous_conv2d: input has {x.shape[1]} channels, kernel expects {p.in_channels}")
    return ops.activation(activation, conv2d(x, p.weight, p.bias, p.dilation))


def max_pool2d(x: Tensor, window: int = POOL_WINDOW) -> Tensor:
    return _max_pool2d(x, window)
