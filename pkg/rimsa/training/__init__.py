"""Loss, schedules, optimizer, datasets, training loop and evaluation."""

from .dataset import (
    DatasetFile,
    DatasetSplit,
    generate_dataset,
    load_dataset,
    pilot_configuration,
    replay_pilots,
    save_dataset,
)
from .evaluation import EvalMetrics, evaluate, random_baseline, zf_reference
from .loss import LossBreakdown, hybrid_loss, rate_tensor, smooth_min
from .optim import AdamW, AdamWState, adamw_step, clip_grad_norm, global_grad_norm
from .schedules import lambda_schedule, onecycle_lr
from .trainer import TrainingReport, make_batches, train

__all__ = [
    "DatasetFile",
    "DatasetSplit",
    "generate_dataset",
    "load_dataset",
    "pilot_configuration",
    "replay_pilots",
    "save_dataset",
    "EvalMetrics",
    "evaluate",
    "random_baseline",
    "zf_reference",
    "LossBreakdown",
    "hybrid_loss",
    "rate_tensor",
    "smooth_min",
    "AdamW",
    "AdamWState",
    "adamw_step",
    "clip_grad_norm",
    "global_grad_norm",
    "lambda_schedule",
    "onecycle_lr",
    "TrainingReport",
    "make_batches",
    "train",
]
