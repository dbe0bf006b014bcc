import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .constants import DECISION_THRESHOLD
from .data.windows import build_windows, sample_windows
from .errors import MetricsError
from .features import stack_samples
from .models import EncodedSample, Metrics
from .network import CrossingNet

logger = logging.getLogger(__name__)

__all__ = [
    'build_windows', 'sample_windows', 'roc_auc', 'mann_whitney_auc', 'metrics', 'predict_scores', 'evaluate',
]


def _split_scores(scores: Sequence[float], labels: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricsError(f"metrics: scores {scores.shape} and labels {labels.shape} must be matching vectors")
    pos, neg = scores[labels == 1], scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise MetricsError(f"metrics: AUC is undefined with {pos.size} positive and {neg.size} negative samples")
    return pos, neg


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Trapezoidal area under the ROC curve over all distinct thresholds.

    The area is accumulated in integer units of 1 / (2 * P * N), so tied scores
    count one half exactly.
    """
    pos, neg = _split_scores(scores, labels)
    values = np.concatenate([pos, neg])
    is_pos = np.concatenate([np.ones(pos.size, dtype=bool), np.zeros(neg.size, dtype=bool)])
    order = np.argsort(-values, kind='stable')
    values, is_pos = values[order], is_pos[order]

    area = 0
    tp = fp = 0
    i = 0
    while i < values.size:
        j = i
        while j < values.size and values[j] == values[i]:
            j += 1
        d_tp = int(np.count_nonzero(is_pos[i:j]))
        d_fp = (j - i) - d_tp
        area += d_fp * (2 * tp + d_tp)
        tp += d_tp
        fp += d_fp
        i = j
    return area / (2 * pos.size * neg.size)


def mann_whitney_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Brute-force pair count: P(score_pos > score_neg) with ties counted 1/2"""
    pos, neg = _split_scores(scores, labels)
    twice = 0
    for p in pos:
        twice += 2 * int(np.count_nonzero(p > neg)) + int(np.count_nonzero(p == neg))
    return twice / (2 * pos.size * neg.size)


def metrics(scores: Sequence[float], labels: Sequence[int], threshold: float = DECISION_THRESHOLD) -> Metrics:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(int)
    if scores.size == 0:
        raise MetricsError("metrics: no scores given")
    predicted = scores >= threshold
    actual = labels == 1
    tp = int(np.count_nonzero(predicted & actual))
    fp = int(np.count_nonzero(predicted & ~actual))
    tn = int(np.count_nonzero(~predicted & ~actual))
    fn = int(np.count_nonzero(~predicted & actual))

    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    auc: Optional[float]
    try:
        auc = roc_auc(scores, labels)
    except MetricsError as e:
        logger.warning(str(e))
        auc = None
    return Metrics(
        acc=(tp + tn) / scores.size, auc=auc, f1=f1, precision=precision, recall=recall,
        tp=tp, fp=fp, tn=tn, fn=fn,
    )


def predict_scores(model: CrossingNet, samples: Sequence[EncodedSample], batch_size: int = 64) -> np.ndarray:
    chunks: List[np.ndarray] = []
    for start in range(0, len(samples), batch_size):
        chunks.append(model.predict(stack_samples(samples[start:start + batch_size], model.streams)))
    return np.concatenate(chunks) if chunks else np.zeros(0)


def evaluate(model: CrossingNet, samples: Sequence[EncodedSample], batch_size: int = 64) -> Metrics:
    """Eval-mode forward over every sample, thresholded at 0.5"""
    scores = predict_scores(model, samples, batch_size)
    result = metrics(scores, [s.label for s in samples])
    logger.debug(f"Evaluated {len(samples)} samples: acc {result.acc:.3f} f1 {result.f1:.3f}")
    return result
