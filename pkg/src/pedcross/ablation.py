import logging
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

from .checkpoint import load_checkpoint
from .errors import CheckpointError, ConfigError
from .evaluation import evaluate
from .models import AblationRow, EncodedSample, ModelConfig, TrainConfig
from .network import VARIANT_NAMES, CrossingNet, variant_configs
from .training import train

logger = logging.getLogger(__name__)

SUITES = {
    "table2": VARIANT_NAMES,
    "architecture": VARIANT_NAMES,
}


def ablation_suite(name: str = "table2", base: Optional[ModelConfig] = None) -> Dict[str, ModelConfig]:
    """Variant name -> config, in suite order"""
    if name not in SUITES:
        raise ConfigError([f"unknown ablation suite '{name}', expected one of {sorted(SUITES)}"], source="ablation")
    configs = variant_configs(base)
    return {variant: configs[variant] for variant in SUITES[name]}


def ablate(
    suite: Mapping[str, ModelConfig],
    train_samples: Sequence[EncodedSample],
    test_samples: Sequence[EncodedSample],
    train_cfg: TrainConfig,
    checkpoints: Optional[Mapping[str, Union[str, Path]]] = None,
    val_samples: Optional[Sequence[EncodedSample]] = None,
    progress: Optional[Callable[[str], None]] = None,
) -> List[AblationRow]:
    """
    Evaluate every variant on the same test samples.

    With `checkpoints`, each variant is loaded from its entry; otherwise each one
    is trained from scratch with the shared train config and seed.
    """
    rows: List[AblationRow] = []
    for variant, config in suite.items():
        if progress:
            progress(f"Variant {variant}")
        if checkpoints is not None:
            if variant not in checkpoints:
                raise CheckpointError(f"ablation: no checkpoint given for variant '{variant}'")
            model = load_checkpoint(checkpoints[variant])
        else:
            model = CrossingNet.build(config)
            train(model, train_samples, train_cfg, val_samples)
        result = evaluate(model, test_samples)
        rows.append(AblationRow(variant=variant, params=model.param_count(), metrics=result))
        logger.info(f"{variant}: {model.param_count()} params, f1 {result.f1:.3f}, acc {result.acc:.3f}")
    return rows
