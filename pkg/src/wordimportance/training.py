"""Training loop: seeded batching, dev-RMS early stopping, Adam.

One "iteration" is an epoch.  After every epoch the dev split is
decoded and its ordinal RMS recorded; parameters with the best dev RMS
so far are kept (ties resolved toward the later epoch, whose train
loss is lower), and training stops after `patience` consecutive
epochs without strict improvement (or at max_epochs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, TrainingDivergedError
from .metrics import MetricsReport, metrics
from .net import (
    ModelConfig,
    UtteranceInput,
    batch_loss_and_grads,
    clip_global_norm,
    init_parameters,
    predict_utterance,
)
from .optim import AdamState, adam_step


@dataclass(frozen=True)
class TrainConfig:
    head_kind: str = "ordinal"
    batch_max_turns: int = 20
    patience: int = 7
    lr: float = 0.001
    max_epochs: int = 200
    seed: int = 0
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    tau: float = 0.050
    hop: float = 0.040
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.batch_max_turns < 1:
            raise ConfigError("batch_max_turns must be >= 1")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")


@dataclass
class TrainResult:
    params: dict[str, np.ndarray]
    best_epoch: int
    best_dev_rms: float
    epochs_run: int
    log: list[dict] = field(default_factory=list)


Dataset = list[tuple[UtteranceInput, np.ndarray]]


def evaluate_dataset(params: dict, cfg: ModelConfig, data: Dataset) -> MetricsReport:
    gold: list[int] = []
    pred: list[int] = []
    for utt, labels in data:
        gold.extend(int(y) for y in labels)
        pred.extend(int(y) for y in predict_utterance(params, cfg, utt))
    return metrics(gold, pred)


def train_model(
    train_set: Dataset,
    dev_set: Dataset,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    dev_rms_fn: Callable[[dict], float] | None = None,
) -> TrainResult:
    """Fit parameters on train_set, early-stopping on dev RMS.

    dev_rms_fn overrides dev evaluation (a test seam); by default the
    dev split is decoded with the model's own head each epoch.
    """
    if not train_set or (not dev_set and dev_rms_fn is None):
        raise ConfigError("training needs non-empty train and dev sets")
    params = init_parameters(model_cfg)
    state = AdamState()
    shuffle_rng = np.random.default_rng(train_cfg.seed)
    best_params = {k: v.copy() for k, v in params.items()}
    best_rms = math.inf
    best_epoch = 0
    streak = 0
    log: list[dict] = []
    epochs_run = 0

    for epoch in range(1, train_cfg.max_epochs + 1):
        epochs_run = epoch
        order = shuffle_rng.permutation(len(train_set))
        batch_losses = []
        for lo in range(0, len(order), train_cfg.batch_max_turns):
            batch = [train_set[i] for i in order[lo : lo + train_cfg.batch_max_turns]]
            loss, grads = batch_loss_and_grads(params, model_cfg, batch)
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss {loss} at epoch {epoch}, "
                    f"batch starting at shuffled index {lo} (head={model_cfg.head_kind})"
                )
            clip_global_norm(grads, train_cfg.clip_norm)
            adam_step(params, grads, state, lr=train_cfg.lr)
            batch_losses.append(loss)

        record: dict = {
            "record": "epoch",
            "epoch": epoch,
            "train_loss": float(np.mean(batch_losses)),
        }
        if dev_rms_fn is not None:
            dev_rms = float(dev_rms_fn(params))
        else:
            report = evaluate_dataset(params, model_cfg, dev_set)
            dev_rms = report.rms
            record.update(dev_acc=report.acc, dev_macro_f1=report.macro_f1)
        record["dev_rms"] = dev_rms

        improved = dev_rms < best_rms
        record["improved"] = improved
        log.append(record)
        if dev_rms <= best_rms:
            # ties keep the latest parameters: equal dev RMS, lower train loss
            best_rms = dev_rms
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in params.items()}
        if improved:
            streak = 0
        else:
            streak += 1
            if streak >= train_cfg.patience:
                break

    return TrainResult(
        params=best_params,
        best_epoch=best_epoch,
        best_dev_rms=best_rms,
        epochs_run=epochs_run,
        log=log,
    )
