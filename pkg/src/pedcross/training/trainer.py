import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from pedcross.errors import DivergenceError, FeatureError, NonFiniteGradientError
from pedcross.evaluation import evaluate
from pedcross.features import stack_samples
from pedcross.models import EncodedSample, EpochRecord, TrainConfig, TrainingLog
from pedcross.network import CrossingNet
from pedcross.training.loss import class_weights, weighted_bce
from pedcross.training.optimizer import Ranger

logger = logging.getLogger(__name__)

EVALUATION_WEIGHTS = "slow after terminal sync"
EPOCH_VALIDATION_WEIGHTS = "fast (current) weights"

ProgressCallback = Callable[[str], None]


@dataclass
class TrainingResult:
    model: CrossingNet
    log: TrainingLog
    optimizer: Ranger


def train(
    model: CrossingNet,
    samples: Sequence[EncodedSample],
    cfg: TrainConfig,
    val_samples: Optional[Sequence[EncodedSample]] = None,
    progress: Optional[ProgressCallback] = None,
) -> TrainingResult:
    """
    Train in place with Ranger on class-weighted BCE.

    Every source of randomness (shuffling, dropout) is derived from cfg.seed, so
    the same seed, samples and configs give bit-identical weights and logs.
    """
    cfg.check()
    if not samples:
        raise FeatureError("train: no training samples")
    labels = np.array([s.label for s in samples])
    weights = cfg.class_weights or class_weights(labels)

    optimizer = Ranger(
        model.parameters(), lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps,
        k=cfg.lookahead_k, alpha=cfg.lookahead_alpha,
    )
    shuffle_rng = np.random.default_rng([cfg.seed, 0])
    dropout_rng = np.random.default_rng([cfg.seed, 1])
    log = TrainingLog(header={
        'seed': cfg.seed,
        'model': model.config.to_dict(),
        'train': cfg.to_dict(),
        'class_weights': list(weights),
        'samples': len(samples),
        'val_samples': len(val_samples or []),
        'evaluation_weights': EVALUATION_WEIGHTS,
        'epoch_validation_weights': EPOCH_VALIDATION_WEIGHTS,
    })
    logger.info(f"Training {model.param_count()} parameters on {len(samples)} samples, class weights {weights}")

    step = 0
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(len(samples))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = stack_samples([samples[i] for i in order[start:start + cfg.batch_size]], model.streams)
            step += 1
            optimizer.zero_grad()
            probs = model.forward(batch, mode="train", rng=dropout_rng)
            loss = weighted_bce(probs, batch.labels, weights, model.final_weight(), model.config.l2_final)
            value = loss.item()
            if not np.isfinite(value):
                logger.error(f"Non-finite loss {value} at epoch {epoch}, step {step}")
                raise DivergenceError(f"loss is {value}", epoch, step)
            loss.backward()
            try:
                optimizer.step()
            except NonFiniteGradientError as e:
                logger.error(f"{e} at epoch {epoch}, step {step}")
                raise DivergenceError(str(e), epoch, step) from e
            losses.append(value)

        record = EpochRecord(epoch=epoch, train_loss=float(np.mean(losses)))
        if val_samples:
            metrics = evaluate(model, val_samples)
            record.val_acc, record.val_auc, record.val_f1 = metrics.acc, metrics.auc, metrics.f1
        log.epochs.append(record)
        message = f"epoch {epoch}/{cfg.epochs} loss {record.train_loss:.5f}"
        if record.val_f1 is not None:
            message += f" val_f1 {record.val_f1:.3f}"
        logger.info(message)
        if progress:
            progress(message)

    optimizer.finalize()
    return TrainingResult(model=model, log=log, optimizer=optimizer)
