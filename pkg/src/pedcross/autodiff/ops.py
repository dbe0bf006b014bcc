"""
Differentiable primitives.

Every public function takes and returns `Tensor`s; scalars and arrays are lifted
to constant tensors. Gradients of broadcast operands are summed back to the
operand's own shape.
"""
import logging
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from pedcross.autodiff.tensor import Function, Tensor
from pedcross.constants import LEAKY_SLOPE
from pedcross.errors import ShapeError

logger = logging.getLogger(__name__)

Operand = Union[Tensor, np.ndarray, float, int]
Axis = Optional[Union[int, Tuple[int, ...]]]


def _normalize_axis(axis: int, ndim: int, op: str) -> int:
    if not -ndim <= axis < ndim:
        raise ShapeError(f"{op}: axis {axis} out of bounds for a {ndim}-d tensor")
    return axis % ndim


def _normalize_axes(axis: Axis, ndim: int, op: str) -> Optional[Tuple[int, ...]]:
    if axis is None:
        return None
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return tuple(sorted(_normalize_axis(a, ndim, op) for a in axes))


def _check_broadcast(op: str, a: np.ndarray, b: np.ndarray) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


# Element-wise arithmetic

class Add(Function):
    def forward(self, a, b):
        _check_broadcast("add", a, b)
        self.shapes = (a.shape, b.shape)
        return a + b

    def backward(self, grad):
        return self.unbroadcast(grad, self.shapes[0]), self.unbroadcast(grad, self.shapes[1])


class Sub(Function):
    def forward(self, a, b):
        _check_broadcast("sub", a, b)
        self.shapes = (a.shape, b.shape)
        return a - b

    def backward(self, grad):
        return self.unbroadcast(grad, self.shapes[0]), self.unbroadcast(-grad, self.shapes[1])


class Mul(Function):
    def forward(self, a, b):
        _check_broadcast("mul", a, b)
        self.a, self.b = a, b
        return a * b

    def backward(self, grad):
        return (
            self.unbroadcast(grad * self.b, self.a.shape),
            self.unbroadcast(grad * self.a, self.b.shape),
        )


class Div(Function):
    def forward(self, a, b):
        _check_broadcast("div", a, b)
        self.a, self.b = a, b
        return a / b

    def backward(self, grad):
        return (
            self.unbroadcast(grad / self.b, self.a.shape),
            self.unbroadcast(-grad * self.a / (self.b * self.b), self.b.shape),
        )


class Neg(Function):
    def forward(self, a):
        return -a

    def backward(self, grad):
        return (-grad,)


class MatMul(Function):
    def forward(self, a, b):
        if a.ndim != 2 or b.ndim != 2:
            raise ShapeError(f"matmul: expects 2-D operands, got {a.shape} and {b.shape}")
        if a.shape[1] != b.shape[0]:
            raise ShapeError(f"matmul: inner extents differ for {a.shape} and {b.shape}")
        self.a, self.b = a, b
        return a @ b

    def backward(self, grad):
        return grad @ self.b.T, self.a.T @ grad


# Activations

class Sigmoid(Function):
    def forward(self, x):
        # exp of a non-positive argument never overflows
        ex = np.exp(-np.abs(x))
        self.out = np.where(x >= 0, 1.0 / (1.0 + ex), ex / (1.0 + ex))
        return self.out

    def backward(self, grad):
        return (grad * self.out * (1.0 - self.out),)


class Tanh(Function):
    def forward(self, x):
        self.out = np.tanh(x)
        return self.out

    def backward(self, grad):
        return (grad * (1.0 - self.out * self.out),)


class LeakyReLU(Function):
    def forward(self, x, slope: float = LEAKY_SLOPE):
        self.x, self.slope = x, slope
        return np.maximum(slope * x, x)

    def backward(self, grad):
        return (grad * np.where(self.x > 0, 1.0, self.slope),)


class ReLU(Function):
    def forward(self, x):
        self.mask = x > 0
        return np.where(self.mask, x, 0.0)

    def backward(self, grad):
        return (grad * self.mask,)


class Exp(Function):
    def forward(self, x):
        self.out = np.exp(x)
        return self.out

    def backward(self, grad):
        return (grad * self.out,)


class Log(Function):
    def forward(self, x):
        self.x = x
        return np.log(x)

    def backward(self, grad):
        return (grad / self.x,)


class Sqrt(Function):
    def forward(self, x):
        self.out = np.sqrt(x)
        return self.out

    def backward(self, grad):
        return (grad * 0.5 / self.out,)


class Softmax(Function):
    def forward(self, x, axis: int = -1):
        self.axis = _normalize_axis(axis, x.ndim, "softmax")
        shifted = x - x.max(axis=self.axis, keepdims=True)
        ex = np.exp(shifted)
        self.out = ex / ex.sum(axis=self.axis, keepdims=True)
        return self.out

    def backward(self, grad):
        inner = (grad * self.out).sum(axis=self.axis, keepdims=True)
        return (self.out * (grad - inner),)


class Clip(Function):
    def forward(self, x, low: float, high: float):
        self.mask = (x >= low) & (x <= high)
        return np.clip(x, low, high)

    def backward(self, grad):
        return (grad * self.mask,)


# Reductions

class Sum(Function):
    def forward(self, x, axis: Axis = None, keepdims: bool = False):
        self.in_shape = x.shape
        self.axes = _normalize_axes(axis, x.ndim, "sum")
        self.keepdims = keepdims
        return np.asarray(x.sum(axis=self.axes, keepdims=keepdims))

    def backward(self, grad):
        if self.axes is not None and not self.keepdims:
            grad = np.expand_dims(grad, self.axes)
        elif self.axes is None and not self.keepdims:
            grad = np.reshape(grad, (1,) * len(self.in_shape))
        return (np.broadcast_to(grad, self.in_shape),)


class Max(Function):
    """Maximum along one axis; ties route the gradient to the lowest index"""

    def forward(self, x, axis: int = -1, keepdims: bool = False):
        self.in_shape = x.shape
        self.axis = _normalize_axis(axis, x.ndim, "reduce_max")
        self.keepdims = keepdims
        # argmax returns the first occurrence
        self.index = np.expand_dims(np.argmax(x, axis=self.axis), self.axis)
        out = np.take_along_axis(x, self.index, axis=self.axis)
        return out if keepdims else np.squeeze(out, axis=self.axis)

    def backward(self, grad):
        if not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        out = np.zeros(self.in_shape)
        np.put_along_axis(out, self.index, grad, axis=self.axis)
        return (out,)


# Structural transforms

class Reshape(Function):
    def forward(self, x, shape: Tuple[int, ...] = ()):
        self.in_shape = x.shape
        try:
            return x.reshape(shape)
        except ValueError:
            raise ShapeError(f"reshape: cannot reshape {x.shape} into {tuple(shape)}") from None

    def backward(self, grad):
        return (grad.reshape(self.in_shape),)


class Transpose(Function):
    def forward(self, x, axes: Optional[Sequence[int]] = None):
        if axes is None:
            axes = tuple(reversed(range(x.ndim)))
        if sorted(_normalize_axis(a, x.ndim, "transpose") for a in axes) != list(range(x.ndim)):
            raise ShapeError(f"transpose: {tuple(axes)} is not a permutation for shape {x.shape}")
        self.axes = tuple(axes)
        return np.transpose(x, self.axes)

    def backward(self, grad):
        return (np.transpose(grad, np.argsort(self.axes)),)


class Slice(Function):
    def forward(self, x, index: Any = None):
        self.in_shape = x.shape
        self.index = index
        try:
            return np.array(x[index])
        except IndexError as e:
            raise ShapeError(f"slice: {e} (shape {x.shape})") from None

    def backward(self, grad):
        out = np.zeros(self.in_shape)
        np.add.at(out, self.index, grad)
        return (out,)


class Reverse(Function):
    def forward(self, x, axis: int = 0):
        self.axis = _normalize_axis(axis, x.ndim, "reverse")
        return np.flip(x, axis=self.axis).copy()

    def backward(self, grad):
        return (np.flip(grad, axis=self.axis).copy(),)


class Concat(Function):
    def forward(self, *arrays, axis: int = 0):
        if not arrays:
            raise ShapeError("concat: needs at least one tensor")
        ndim = arrays[0].ndim
        self.axis = _normalize_axis(axis, ndim, "concat")
        for arr in arrays[1:]:
            other = [d for i, d in enumerate(arr.shape) if i != self.axis]
            first = [d for i, d in enumerate(arrays[0].shape) if i != self.axis]
            if arr.ndim != ndim or other != first:
                raise ShapeError(
                    f"concat: shapes {arrays[0].shape} and {arr.shape} differ off axis {self.axis}"
                )
        self.bounds = np.cumsum([arr.shape[self.axis] for arr in arrays])[:-1]
        return np.concatenate(arrays, axis=self.axis)

    def backward(self, grad):
        return tuple(np.split(grad, self.bounds, axis=self.axis))


class Stack(Function):
    def forward(self, *arrays, axis: int = 0):
        if not arrays:
            raise ShapeError("stack: needs at least one tensor")
        shapes = {arr.shape for arr in arrays}
        if len(shapes) != 1:
            raise ShapeError(f"stack: tensors have differing shapes {sorted(shapes)}")
        self.axis = _normalize_axis(axis, arrays[0].ndim + 1, "stack")
        return np.stack(arrays, axis=self.axis)

    def backward(self, grad):
        return tuple(np.moveaxis(grad, self.axis, 0))


# Public functional API

def add(a: Operand, b: Operand) -> Tensor:
    return Add.apply(Tensor.lift(a), Tensor.lift(b))


def sub(a: Operand, b: Operand) -> Tensor:
    return Sub.apply(Tensor.lift(a), Tensor.lift(b))


def mul(a: Operand, b: Operand) -> Tensor:
    return Mul.apply(Tensor.lift(a), Tensor.lift(b))


def div(a: Operand, b: Operand) -> Tensor:
    return Div.apply(Tensor.lift(a), Tensor.lift(b))


def neg(a: Operand) -> Tensor:
    return Neg.apply(Tensor.lift(a))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return MatMul.apply(Tensor.lift(a), Tensor.lift(b))


def sigmoid(x: Tensor) -> Tensor:
    return Sigmoid.apply(x)


def tanh(x: Tensor) -> Tensor:
    return Tanh.apply(x)


def leaky_relu(x: Tensor, slope: float = LEAKY_SLOPE) -> Tensor:
    return LeakyReLU.apply(x, slope=slope)


def relu(x: Tensor) -> Tensor:
    return ReLU.apply(x)


def identity(x: Tensor) -> Tensor:
    return x


def exp(x: Tensor) -> Tensor:
    return Exp.apply(x)


def log(x: Tensor) -> Tensor:
    return Log.apply(x)


def sqrt(x: Tensor) -> Tensor:
    return Sqrt.apply(x)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    return Softmax.apply(x, axis=axis)


def clip(x: Tensor, low: float, high: float) -> Tensor:
    return Clip.apply(x, low=low, high=high)


def reduce_sum(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    return Sum.apply(x, axis=axis, keepdims=keepdims)


def reduce_mean(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim, "reduce_mean")
    count = x.size if axes is None else int(np.prod([x.shape[a] for a in axes]))
    return div(reduce_sum(x, axes, keepdims), float(count))


def reduce_max(x: Tensor, axis: int = -1, keepdims: bool = False) -> Tensor:
    return Max.apply(x, axis=axis, keepdims=keepdims)


def global_avg_pool(x: Tensor) -> Tensor:
    """(B, C, H, W) -> (B, C)"""
    if x.ndim != 4:
        raise ShapeError(f"global_avg_pool: expects (B, C, H, W), got {x.shape}")
    return reduce_mean(x, axis=(2, 3))


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    return Reshape.apply(x, shape=tuple(shape))


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    return Transpose.apply(x, axes=axes)


def slice_(x: Tensor, index: Any) -> Tensor:
    return Slice.apply(x, index=index)


def slice_range(x: Tensor, axis: int, start: int, stop: int) -> Tensor:
    """Bounds-checked contiguous range along one axis"""
    axis = _normalize_axis(axis, x.ndim, "slice")
    extent = x.shape[axis]
    if not 0 <= start < stop <= extent:
        raise ShapeError(f"slice: range [{start}, {stop}) invalid for axis {axis} of extent {extent}")
    index = tuple(slice(start, stop) if i == axis else slice(None) for i in range(x.ndim))
    return Slice.apply(x, index=index)


def reverse(x: Tensor, axis: int = 0) -> Tensor:
    return Reverse.apply(x, axis=axis)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    return Concat.apply(*tensors, axis=axis)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    return Stack.apply(*tensors, axis=axis)


_ELEMENTWISE: Dict[str, Callable[[Operand, Operand], Tensor]] = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "div": div,
}

_ACTIVATIONS: Dict[str, Callable[..., Tensor]] = {
    "sigmoid": sigmoid,
    "tanh": tanh,
    "leaky_relu": leaky_relu,
    "relu": relu,
    "softmax": softmax,
    "identity": identity,
}

_STRUCTURAL: Dict[str, Callable[..., Tensor]] = {
    "concat": concat,
    "stack": stack,
    "slice": slice_range,
    "reshape": reshape,
    "transpose": transpose,
    "reverse": reverse,
    "reduce_mean": reduce_mean,
    "reduce_max": reduce_max,
    "reduce_sum": reduce_sum,
    "global_avg_pool": global_avg_pool,
}


def elementwise(op_kind: str, a: Operand, b: Operand) -> Tensor:
    if op_kind not in _ELEMENTWISE:
        raise ValueError(f"Unknown element-wise op '{op_kind}', expected one of {sorted(_ELEMENTWISE)}")
    return _ELEMENTWISE[op_kind](a, b)


def activation(kind: str, x: Tensor, **kwargs: Any) -> Tensor:
    if kind not in _ACTIVATIONS:
        raise ValueError(f"Unknown activation '{kind}', expected one of {sorted(_ACTIVATIONS)}")
    return _ACTIVATIONS[kind](x, **kwargs)


def structural(kind: str, *args: Any, **kwargs: Any) -> Tensor:
    if kind not in _STRUCTURAL:
        raise ValueError(f"Unknown structural op '{kind}', expected one of {sorted(_STRUCTURAL)}")
    return _STRUCTURAL[kind](*args, **kwargs)
