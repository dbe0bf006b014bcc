"""
Ranger = RAdam inner steps wrapped in Lookahead slow/fast weight averaging.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

import numpy as np

from pedcross.autodiff import Tensor
from pedcross.constants import ADAM_EPSILON, BETA1, BETA2, LOOKAHEAD_ALPHA, LOOKAHEAD_K, RADAM_RHO_THRESHOLD
from pedcross.errors import NonFiniteGradientError

logger = logging.getLogger(__name__)


def rectification(t: int, beta2: float = BETA2) -> Tuple[float, float]:
    """(rho_t, r_t); r_t is 0 when the variance estimate is not yet tractable"""
    rho_inf = 2.0 / (1.0 - beta2) - 1.0
    beta2_t = beta2 ** t
    rho_t = rho_inf - 2.0 * t * beta2_t / (1.0 - beta2_t)
    if rho_t <= RADAM_RHO_THRESHOLD:
        return rho_t, 0.0
    r_t = math.sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) / ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t))
    return rho_t, r_t


def radam_update(
    w: np.ndarray, g: np.ndarray, m: np.ndarray, v: np.ndarray, t: int,
    lr: float, beta1: float = BETA1, beta2: float = BETA2, eps: float = ADAM_EPSILON,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One RAdam step at step number t (1-based); returns new (w, m, v)"""
    m = beta1 * m + (1.0 - beta1) * g
    v = beta2 * v + (1.0 - beta2) * g * g
    m_hat = m / (1.0 - beta1 ** t)
    rho_t, r_t = rectification(t, beta2)
    if rho_t > RADAM_RHO_THRESHOLD:
        v_hat = np.sqrt(v / (1.0 - beta2 ** t))
        return w - lr * r_t * m_hat / (v_hat + eps), m, v
    return w - lr * m_hat, m, v


def lookahead_sync(slow: np.ndarray, fast: np.ndarray, alpha: float = LOOKAHEAD_ALPHA) -> np.ndarray:
    """New slow weights; the fast weights are reset to them by the caller"""
    return slow + alpha * (fast - slow)


class RAdam:
    def __init__(self, params: Mapping[str, Tensor], lr: float,
                 beta1: float = BETA1, beta2: float = BETA2, eps: float = ADAM_EPSILON) -> None:
        self.params = dict(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in self.params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params.items()}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def step(self) -> None:
        """Apply one update from the accumulated grads; nothing changes if any grad is non-finite"""
        grads = {}
        for name, p in self.params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if not np.isfinite(g).all():
                raise NonFiniteGradientError(name)
            grads[name] = g
        self.t += 1
        for name, p in self.params.items():
            p.data, self.m[name], self.v[name] = radam_update(
                p.data, grads[name], self.m[name], self.v[name], self.t,
                self.lr, self.beta1, self.beta2, self.eps,
            )


class Lookahead:
    def __init__(self, inner: RAdam, k: int = LOOKAHEAD_K, alpha: float = LOOKAHEAD_ALPHA) -> None:
        self.inner = inner
        self.k = k
        self.alpha = alpha
        self.slow = {name: p.data.copy() for name, p in inner.params.items()}
        self.steps = 0
        self.sync_steps: List[int] = []

    def zero_grad(self) -> None:
        self.inner.zero_grad()

    def step(self) -> None:
        self.inner.step()
        self.steps += 1
        if self.steps % self.k == 0:
            self.sync()

    def sync(self) -> None:
        for name, p in self.inner.params.items():
            self.slow[name] = lookahead_sync(self.slow[name], p.data, self.alpha)
            p.data = self.slow[name].copy()
        self.sync_steps.append(self.steps)
        logger.debug(f"Lookahead sync at step {self.steps}")

    def finalize(self) -> None:
        """Terminal sync so the model holds the slow weights"""
        if not self.sync_steps or self.sync_steps[-1] != self.steps:
            self.sync()


@dataclass
class Ranger:
    params: Mapping[str, Tensor]
    lr: float
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = ADAM_EPSILON
    k: int = LOOKAHEAD_K
    alpha: float = LOOKAHEAD_ALPHA
    lookahead: Lookahead = field(init=False)

    def __post_init__(self) -> None:
        self.lookahead = Lookahead(RAdam(self.params, self.lr, self.beta1, self.beta2, self.eps), self.k, self.alpha)

    @property
    def step_count(self) -> int:
        return self.lookahead.steps

    @property
    def sync_steps(self) -> List[int]:
        return list(self.lookahead.sync_steps)

    def slow_weights(self) -> Dict[str, np.ndarray]:
        return {name: w.copy() for name, w in self.lookahead.slow.items()}

    def zero_grad(self) -> None:
        self.lookahead.zero_grad()

    def step(self) -> None:
        self.lookahead.step()

    def finalize(self) -> None:
        self.lookahead.finalize()
