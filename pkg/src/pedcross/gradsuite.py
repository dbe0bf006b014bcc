"""
Gradient checks for every layer of the crossing predictor.

Each case builds small parameters from a seeded store, a random input and a
fixed random projection, and compares autodiff against central differences on
sum(projection * output).
"""
import logging
import time
from typing import Callable, Dict, List, Mapping, Tuple

import numpy as np

from .autodiff import Tensor, gradient_check, ops
from .constants import ALL_STREAMS, BBOX_DIM, STREAM_BBOX, STREAM_JCD, STREAM_PSEUDO_IMAGE, STREAM_SPEED
from .layers import (
    ParameterStore, atrous_conv2d, batch_norm, cbam, dense, gru_cell, modality_attention, se_block,
    temporal_attention, ugru_block,
)
from .models import GradCheckReport, ModelConfig
from .network import CrossingNet
from .training.loss import weighted_bce

logger = logging.getLogger(__name__)

DILATIONS = ((1, 1), (2, 1), (3, 1))
DEFAULT_TOLERANCE = 1e-4

Case = Tuple[Callable[[], Tensor], Dict[str, Tensor]]


def _input(rng: np.random.Generator, shape: Tuple[int, ...], name: str = "input") -> Tensor:
    return Tensor(rng.normal(size=shape), requires_grad=True, name=name)


def _projected(out: Tensor, projection: np.ndarray) -> Tensor:
    return ops.reduce_sum(out * projection)


def _with_input(store: ParameterStore, x: Tensor) -> Dict[str, Tensor]:
    params = store.parameters()
    params[x.name] = x
    return params


def _conv_case(rng: np.random.Generator, seed: int, dilation: Tuple[int, int]) -> Case:
    store = ParameterStore(seed)
    p = store.conv("conv", 2, 3, dilation=dilation)
    x = _input(rng, (2, 2, 7, 5))
    projection = rng.normal(size=(2, 3, 7, 5))
    return (lambda: _projected(atrous_conv2d(x, p), projection)), _with_input(store, x)


def _cbam_case(rng: np.random.Generator, seed: int) -> Case:
    store = ParameterStore(seed)
    p = store.cbam("cbam", 4)
    x = _input(rng, (2, 4, 5, 5))
    projection = rng.normal(size=x.shape)
    return (lambda: _projected(cbam(x, p), projection)), _with_input(store, x)


def _se_case(rng: np.random.Generator, seed: int) -> Case:
    store = ParameterStore(seed)
    p = store.se("se", 4)
    x = _input(rng, (2, 4, 3, 3))
    projection = rng.normal(size=x.shape)
    return (lambda: _projected(se_block(x, p), projection)), _with_input(store, x)


def _gru_cell_case(rng: np.random.Generator, seed: int) -> Case:
    store = ParameterStore(seed)
    p = store.gru_cell("cell", 3, 4)
    x = _input(rng, (2, 3))
    h = _input(rng, (2, 4), name="state")
    projection = rng.normal(size=(2, 4))
    params = _with_input(store, x)
    params[h.name] = h
    return (lambda: _projected(gru_cell(x, h, p), projection)), params


def _ugru_case(rng: np.random.Generator, seed: int) -> Case:
    store = ParameterStore(seed)
    p = store.recurrent_block("ugru", "ugru", 3, 4)
    x = _input(rng, (2, 5, 3))
    projection = rng.normal(size=(2, 5, 4))
    return (lambda: _projected(ugru_block(x, p), projection)), _with_input(store, x)


def _temporal_attention_case(rng: np.random.Generator, seed: int) -> Case:
    store = ParameterStore(seed)
    p = store.temporal_attention("attention", 3)
    x = _input(rng, (2, 5, 3))
    projection = rng.normal(size=(2, 3))
    return (lambda: _projected(temporal_attention(x, p), projection)), _with_input(store, x)


def _modality_attention_case(rng: np.random.Generator, seed: int) -> Case:
    store = ParameterStore(seed)
    p = store.modality_attention("fusion", 3)
    vectors = [_input(rng, (2, 3), name=f"modality{k}") for k in range(3)]
    projection = rng.normal(size=(2, 3))
    params = store.parameters()
    params.update({v.name: v for v in vectors})
    return (lambda: _projected(modality_attention(vectors, p), projection)), params


def _dense_case(rng: np.random.Generator, seed: int) -> Case:
    store = ParameterStore(seed)
    p = store.dense("dense", 4, 3)
    x = _input(rng, (5, 4))
    projection = rng.normal(size=(5, 3))
    return (lambda: _projected(dense(x, p, "tanh"), projection)), _with_input(store, x)


def _batch_norm_case(rng: np.random.Generator, seed: int) -> Case:
    store = ParameterStore(seed)
    state = store.batch_norm("bn", 3)
    state.gamma.data = rng.uniform(0.5, 1.5, size=3)
    state.beta.data = rng.normal(size=3)
    x = _input(rng, (4, 3, 2, 2))
    projection = rng.normal(size=x.shape)
    return (lambda: _projected(batch_norm(x, state, "train"), projection)), _with_input(store, x)


def _weighted_bce_case(rng: np.random.Generator, seed: int) -> Case:
    probs = Tensor(rng.uniform(0.05, 0.95, size=6), requires_grad=True, name="probs")
    final = Tensor(rng.normal(size=(3, 1)), requires_grad=True, name="final_weight")
    labels = np.array([0, 1, 1, 0, 1, 0])
    weights = (0.75, 1.5)
    return (lambda: weighted_bce(probs, labels, weights, final, l2=0.01)), {probs.name: probs, final.name: final}


def tiny_batch(config: ModelConfig, rng: np.random.Generator, batch_size: int = 3) -> Dict[str, np.ndarray]:
    """Random inputs for every stream of `config`"""
    shapes = {
        STREAM_PSEUDO_IMAGE: (config.frames, config.joints, config.coord_dim),
        STREAM_JCD: (config.frames, config.jcd_dim),
        STREAM_BBOX: (config.frames, BBOX_DIM),
        STREAM_SPEED: (config.frames, 1),
    }
    return {s: rng.uniform(0.0, 1.0, size=(batch_size,) + shapes[s]) for s in ALL_STREAMS if config.has_stream(s)}


def _model_case(rng: np.random.Generator, seed: int) -> Case:
    config = ModelConfig.tiny(seed=seed)
    model = CrossingNet.build(config)
    batch = tiny_batch(config, rng)
    labels = np.array([1, 0, 1])

    def loss() -> Tensor:
        probs = model.forward(batch, mode="train")
        return weighted_bce(probs, labels, (1.0, 1.0), model.final_weight(), config.l2_final)

    return loss, model.parameters()


def gradient_cases(seed: int = 0) -> Dict[str, Case]:
    rng = np.random.default_rng(seed)
    cases: Dict[str, Case] = {}
    for dilation in DILATIONS:
        cases[f"atrous_conv_{dilation[0]}x{dilation[1]}"] = _conv_case(rng, seed, dilation)
    cases["cbam"] = _cbam_case(rng, seed)
    cases["se"] = _se_case(rng, seed)
    cases["gru_cell"] = _gru_cell_case(rng, seed)
    cases["ugru_block"] = _ugru_case(rng, seed)
    cases["temporal_attention"] = _temporal_attention_case(rng, seed)
    cases["modality_attention"] = _modality_attention_case(rng, seed)
    cases["dense"] = _dense_case(rng, seed)
    cases["batch_norm"] = _batch_norm_case(rng, seed)
    cases["weighted_bce"] = _weighted_bce_case(rng, seed)
    cases["tiny_model"] = _model_case(rng, seed)
    return cases


def run_gradient_suite(seed: int = 0) -> Dict[str, GradCheckReport]:
    reports: Dict[str, GradCheckReport] = {}
    started = time.perf_counter()
    for name, (f, params) in gradient_cases(seed).items():
        reports[name] = gradient_check(f, params)
        logger.info(f"gradcheck {name}: max relative error {reports[name].max_relative_error:.3e}")
    logger.info(f"Gradient suite finished in {time.perf_counter() - started:.1f}s")
    return reports


def failed_checks(reports: Mapping[str, GradCheckReport], tolerance: float = DEFAULT_TOLERANCE) -> List[str]:
    return [name for name, report in reports.items() if not report.passed(tolerance)]
