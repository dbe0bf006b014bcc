import logging
from typing import Callable, Dict, Mapping

import numpy as np

from pedcross.autodiff.tensor import Tensor
from pedcross.errors import GradCheckError
from pedcross.models import GradCheckReport

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """||a - n|| / max(||a|| + ||n||, 1e-12)"""
    diff = float(np.linalg.norm(analytic - numeric))
    scale = float(np.linalg.norm(analytic) + np.linalg.norm(numeric))
    return diff / max(scale, 1e-12)


def _evaluate(f: Callable[[], Tensor]) -> float:
    value = f().item()
    if not np.isfinite(value):
        raise GradCheckError(f"gradcheck: function returned non-finite value {value}")
    return value


def numeric_gradient(f: Callable[[], Tensor], param: Tensor, step: float = DEFAULT_STEP) -> np.ndarray:
    """Central differences, perturbing one scalar of `param` at a time"""
    original = param.data
    grad = np.zeros_like(original)
    try:
        for i in range(original.size):
            shifted = original.copy()
            shifted.flat[i] += step
            param.data = shifted
            plus = _evaluate(f)
            shifted = original.copy()
            shifted.flat[i] -= step
            param.data = shifted
            minus = _evaluate(f)
            grad.flat[i] = (plus - minus) / (2.0 * step)
    finally:
        param.data = original
    return grad


def gradient_check(
    f: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    step: float = DEFAULT_STEP,
) -> GradCheckReport:
    """
    Compare autodiff gradients of a scalar function against central differences.

    `f` must rebuild its graph from the current values of `params` on each call
    and be deterministic.
    """
    for param in params.values():
        param.zero_grad()
    loss = f()
    if not np.isfinite(loss.data).all():
        raise GradCheckError(f"gradcheck: function returned non-finite value {loss.data}")
    loss.backward()

    errors: Dict[str, float] = {}
    for name, param in params.items():
        analytic = param.grad if param.grad is not None else np.zeros_like(param.data)
        if not np.isfinite(analytic).all():
            raise GradCheckError(f"gradcheck: non-finite autodiff gradient for '{name}'")
        numeric = numeric_gradient(f, param, step)
        errors[name] = relative_error(analytic, numeric)
        logger.debug(f"gradcheck {name}: shape={param.shape} rel_err={errors[name]:.3e}")

    return GradCheckReport(
        max_relative_error=max(errors.values(), default=0.0),
        per_parameter_errors=errors,
    )
