import logging
from typing import Tuple

import numpy as np

from pedcross.autodiff.tensor import Function, Tensor
from pedcross.constants import POOL_WINDOW
from pedcross.errors import ShapeError

logger = logging.getLogger(__name__)


class Conv2d(Function):
    """
    Dilated 2-D cross-correlation with zero "same" padding.

    out[b, k, m, n] = sum_{c,i,j} x[b, c, m + r1*(i - ci), n + r2*(j - cj)] * w[k, c, i, j] + bias[k]
    where (ci, cj) is the kernel centre. No kernel flip.
    """

    def forward(self, x, w, bias, dilation: Tuple[int, int] = (1, 1)):
        if x.ndim != 4 or w.ndim != 4:
            raise ShapeError(f"conv2d: expects x (B, C, H, W) and w (K, C, kh, kw), got {x.shape} and {w.shape}")
        if x.shape[1] != w.shape[1]:
            raise ShapeError(f"conv2d: input has {x.shape[1]} channels, kernel expects {w.shape[1]} ({x.shape} vs {w.shape})")
        if bias.shape != (w.shape[0],):
            raise ShapeError(f"conv2d: bias shape {bias.shape} does not match {w.shape[0]} filters")
        kh, kw = w.shape[2], w.shape[3]
        if kh % 2 == 0 or kw % 2 == 0:
            raise ShapeError(f"conv2d: same padding needs odd kernel extents, got {kh}x{kw}")
        r1, r2 = dilation
        if r1 < 1 or r2 < 1:
            raise ShapeError(f"conv2d: dilation must be positive, got {dilation}")

        batch, channels, height, width = x.shape
        self.pad = (r1 * (kh // 2), r2 * (kw // 2))
        self.dilation = (r1, r2)
        self.x_shape = x.shape
        self.w = w

        padded = np.pad(x, ((0, 0), (0, 0), (self.pad[0], self.pad[0]), (self.pad[1], self.pad[1])))
        cols = np.empty((batch, channels, kh, kw, height, width))
        for i in range(kh):
            for j in range(kw):
                cols[:, :, i, j] = padded[:, :, i * r1:i * r1 + height, j * r2:j * r2 + width]
        self.cols = cols

        out = np.tensordot(cols, w, axes=([1, 2, 3], [1, 2, 3]))  # (B, H, W, K)
        return np.ascontiguousarray(out.transpose(0, 3, 1, 2)) + bias[None, :, None, None]

    def backward(self, grad):
        batch, channels, height, width = self.x_shape
        kh, kw = self.w.shape[2], self.w.shape[3]
        r1, r2 = self.dilation

        grad_w = np.tensordot(grad, self.cols, axes=([0, 2, 3], [0, 4, 5]))  # (K, C, kh, kw)
        grad_b = grad.sum(axis=(0, 2, 3))

        grad_cols = np.tensordot(grad, self.w, axes=([1], [0]))  # (B, H, W, C, kh, kw)
        grad_cols = grad_cols.transpose(0, 3, 4, 5, 1, 2)
        grad_padded = np.zeros((batch, channels, height + 2 * self.pad[0], width + 2 * self.pad[1]))
        for i in range(kh):
            for j in range(kw):
                grad_padded[:, :, i * r1:i * r1 + height, j * r2:j * r2 + width] += grad_cols[:, :, i, j]
        grad_x = grad_padded[:, :, self.pad[0]:self.pad[0] + height, self.pad[1]:self.pad[1] + width]
        return grad_x, grad_w, grad_b


class MaxPool2d(Function):
    """Non-overlapping 2x2 max pooling; odd trailing rows/columns are dropped"""

    def forward(self, x, window: int = POOL_WINDOW):
        if x.ndim != 4:
            raise ShapeError(f"max_pool2d: expects (B, C, H, W), got {x.shape}")
        batch, channels, height, width = x.shape
        if height < window or width < window:
            raise ShapeError(f"max_pool2d: spatial extent {height}x{width} smaller than window {window}x{window}")
        out_h, out_w = height // window, width // window
        self.x_shape = x.shape
        self.window = window

        cropped = x[:, :, :out_h * window, :out_w * window]
        blocks = cropped.reshape(batch, channels, out_h, window, out_w, window)
        blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(batch, channels, out_h, out_w, window * window)
        # argmax picks the first maximum in row-major window order
        self.index = np.argmax(blocks, axis=-1)
        return np.take_along_axis(blocks, self.index[..., None], axis=-1)[..., 0]

    def backward(self, grad):
        batch, channels, height, width = self.x_shape
        window = self.window
        out_h, out_w = grad.shape[2], grad.shape[3]
        blocks = np.zeros((batch, channels, out_h, out_w, window * window))
        np.put_along_axis(blocks, self.index[..., None], grad[..., None], axis=-1)
        blocks = blocks.reshape(batch, channels, out_h, out_w, window, window).transpose(0, 1, 2, 4, 3, 5)
        grad_x = np.zeros(self.x_shape)
        grad_x[:, :, :out_h * window, :out_w * window] = blocks.reshape(batch, channels, out_h * window, out_w * window)
        return (grad_x,)


def conv2d(x: Tensor, weight: Tensor, bias: Tensor, dilation: Tuple[int, int] = (1, 1)) -> Tensor:
    return Conv2d.apply(x, weight, bias, dilation=tuple(dilation))


def max_pool2d(x: Tensor, window: int = POOL_WINDOW) -> Tensor:
    return MaxPool2d.apply(x, window=window)
