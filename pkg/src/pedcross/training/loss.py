import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from pedcross.autodiff import Tensor, ops
from pedcross.constants import PROB_CLAMP
from pedcross.errors import FeatureError, ShapeError

logger = logging.getLogger(__name__)


def class_weights(labels: Sequence[int]) -> Tuple[float, float]:
    """(w_neg, w_pos) with w_c = n_total / (2 * n_c)"""
    labels = np.asarray(labels)
    total = labels.size
    n_pos = int(np.count_nonzero(labels == 1))
    n_neg = int(np.count_nonzero(labels == 0))
    if n_pos + n_neg != total:
        raise FeatureError(f"class_weights: labels must be 0 or 1, got values {sorted(set(labels.tolist()))}")
    if n_pos == 0 or n_neg == 0:
        raise FeatureError(f"class_weights: both classes are required, got {n_neg} negative and {n_pos} positive")
    return total / (2.0 * n_neg), total / (2.0 * n_pos)


def weighted_bce(
    probs: Tensor,
    labels: np.ndarray,
    weights: Tuple[float, float] = (1.0, 1.0),
    final_weight: Optional[Tensor] = None,
    l2: float = 0.0,
) -> Tensor:
    """
    Mean of -w_y * (y ln p + (1 - y) ln(1 - p)) with p clamped to [1e-7, 1 - 1e-7],
    plus l2 * ||final_weight||^2 when a final-layer weight is given.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if probs.shape != labels.shape:
        raise ShapeError(f"weighted_bce: probabilities {probs.shape} and labels {labels.shape} differ")
    w_neg, w_pos = weights
    sample_weights = np.where(labels == 1.0, w_pos, w_neg)

    p = ops.clip(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)
    log_likelihood = labels * ops.log(p) + (1.0 - labels) * ops.log(1.0 - p)
    loss = ops.reduce_mean(-(sample_weights * log_likelihood))
    if final_weight is not None and l2 > 0:
        loss = loss + l2 * ops.reduce_sum(final_weight * final_weight)
    return loss
