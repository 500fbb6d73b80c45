"""Mini-batch training loop with accumulation, schedules and early stopping."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union
import math
import time

import numpy as np
import structlog

from rimsa.autodiff.checkpoint import save_checkpoint
from rimsa.config import SystemConfig, TrainConfig
from rimsa.errors import ConfigError, EmptyDatasetError
from rimsa.training.dataset import DatasetFile, DatasetSplit
from rimsa.training.evaluation import evaluate
from rimsa.training.loss import hybrid_loss
from rimsa.training.optim import AdamW
from rimsa.training.schedules import lambda_schedule, onecycle_lr
from rimsa.utils.metrics import EpochMetrics, MetricsTracker
from rimsa.utils.rng import stream

logger = structlog.get_logger(__name__)


@dataclass
class TrainingReport:
    epochs_run: int
    history: List[EpochMetrics]
    best_epoch: int
    best_val_loss: float
    early_stopped: bool
    steps: int
    checkpoint_path: Optional[Path] = None
    tracker: Optional[MetricsTracker] = field(default=None, repr=False)


def make_batches(order: np.ndarray, batch_size: int) -> List[np.ndarray]:
    """Split an index order into batches; a trailing batch of one joins the previous batch."""
    batches = [order[i : i + batch_size] for i in range(0, len(order), batch_size)]
    if len(batches) > 1 and len(batches[-1]) == 1:
        last = batches.pop()
        batches[-1] = np.concatenate([batches[-1], last])
    return batches


def steps_per_epoch(n_samples: int, cfg: TrainConfig) -> int:
    n_batches = len(make_batches(np.arange(n_samples), cfg.batch_size))
    return math.ceil(n_batches / cfg.accum_steps)


def train(
    model,
    dataset: DatasetFile,
    cfg: TrainConfig,
    sys_cfg: SystemConfig,
    checkpoint_path: Optional[Union[str, Path]] = None,
) -> TrainingReport:
    """
    Train on the dataset's train split and early-stop on the validation rate loss.

    The best-validation parameters are restored into the model at the end and,
    when checkpoint_path is given, written there each time they improve.
    """
    dataset.check_compatible(sys_cfg)
    train_split = dataset.split("train")
    if len(train_split) == 0:
        raise EmptyDatasetError("training split is empty")
    if len(train_split) < 2:
        raise ConfigError(
            f"training split has {len(train_split)} sample; BatchNorm training needs at least 2"
        )
    val_split = dataset.split("val")
    if len(val_split) == 0:
        logger.warning("validation split is empty; validating on the training split")
        val_split = train_split

    checkpoint_path = Path(checkpoint_path) if checkpoint_path is not None else None
    per_epoch = steps_per_epoch(len(train_split), cfg)
    total_steps = cfg.epochs * per_epoch
    if cfg.max_steps is not None:
        total_steps = min(total_steps, cfg.max_steps)

    optimizer = AdamW(model.parameters(), cfg.betas, cfg.eps, cfg.weight_decay, cfg.grad_clip)
    tracker = MetricsTracker(cfg.utility)
    best_state = model.state_dict()
    step = 0

    logger.info(
        f"Training for up to {cfg.epochs} epochs ({total_steps} optimizer steps)",
        samples=len(train_split),
        utility=cfg.utility,
        batch_size=cfg.batch_size,
        accum_steps=cfg.accum_steps,
    )

    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        lam = lambda_schedule(epoch, cfg)
        lr = onecycle_lr(step, total_steps, cfg)
        order = stream(cfg.seed, "shuffle", epoch).permutation(len(train_split))
        batches = make_batches(order, cfg.batch_size)

        model.train()
        sums = {"total": 0.0, "l_mse": 0.0, "l_rate": 0.0, "l_fro": 0.0}
        for start in range(0, len(batches), cfg.accum_steps):
            if step >= total_steps:
                break
            group = batches[start : start + cfg.accum_steps]
            for idx in group:
                batch: DatasetSplit = train_split.batch(idx)
                out = model(batch.y, p_max=sys_cfg.p_data_mw)
                loss = hybrid_loss(
                    out, batch.h, sys_cfg, lam, cfg.lambda_pre, cfg.utility, cfg.softmin_temperature
                )
                (loss.total * (1.0 / len(group))).backward()
                for key, value in loss.values().items():
                    sums[key] += value * len(idx)

            lr = onecycle_lr(step, total_steps, cfg)
            optimizer.step(lr)
            optimizer.zero_grad()
            step += 1

        n = len(train_split)
        val = evaluate(model, val_split, sys_cfg)
        val_loss = -(val.max_min if cfg.utility == "maxmin" else val.sum_rate)
        metrics = EpochMetrics(
            epoch=epoch,
            lr=lr,
            lambda_rate=lam,
            train_total=sums["total"] / n,
            l_mse=sums["l_mse"] / n,
            l_rate=sums["l_rate"] / n,
            l_fro=sums["l_fro"] / n,
            val_rate=val.sum_rate,
            val_maxmin=val.max_min,
            val_loss=val_loss,
            duration_ms=(time.perf_counter() - started) * 1000,
        )
        if tracker.record_epoch(metrics):
            best_state = model.state_dict()
            if checkpoint_path is not None:
                save_checkpoint(checkpoint_path, model.checkpoint_tensors())

        logger.info(
            "epoch complete",
            epoch=epoch,
            lr=lr,
            lambda_rate=lam,
            train_total=metrics.train_total,
            l_mse=metrics.l_mse,
            l_rate=metrics.l_rate,
            l_fro=metrics.l_fro,
            val_rate=metrics.val_rate,
            val_maxmin=metrics.val_maxmin,
        )

        if tracker.epochs_since_best() >= cfg.early_stop_patience:
            tracker.mark_early_stop()
            logger.info(
                f"Early stopping at epoch {epoch}: no improvement for "
                f"{cfg.early_stop_patience} epochs"
            )
            break
        if step >= total_steps:
            break

    model.load_state_dict(best_state)
    summary = tracker.get_summary()
    return TrainingReport(
        epochs_run=summary.epochs_run,
        history=tracker.epochs,
        best_epoch=summary.best_epoch,
        best_val_loss=summary.best_val_loss,
        early_stopped=summary.early_stopped,
        steps=step,
        checkpoint_path=checkpoint_path,
        tracker=tracker,
    )
