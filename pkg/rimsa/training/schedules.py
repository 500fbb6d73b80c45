"""Loss-weight and learning-rate schedules."""

from rimsa.config import TrainConfig


def lambda_schedule(epoch: int, cfg: TrainConfig) -> float:
    """Linear ramp 0 -> lambda_rate_max over warmup_fraction * epochs, then constant."""
    warmup = cfg.warmup_fraction * cfg.epochs
    if epoch >= warmup:
        return cfg.lambda_rate_max
    return cfg.lambda_rate_max * max(epoch, 0) / warmup


def peak_step(total_steps: int, cfg: TrainConfig) -> int:
    last = total_steps - 1
    return max(1, min(last, round(cfg.rise_fraction * last)))


def onecycle_lr(step: int, total_steps: int, cfg: TrainConfig) -> float:
    """
    Triangular one-cycle policy.

    Rises linearly from lr_min at step 0 to lr_max at the peak step
    (rise_fraction of the run), then falls linearly back to lr_min at the
    final step. The endpoints and the peak are returned exactly.
    """
    if total_steps <= 1:
        return cfg.lr_min
    last = total_steps - 1
    peak = peak_step(total_steps, cfg)
    step = min(max(step, 0), last)
    span = cfg.lr_max - cfg.lr_min
    if step == peak:
        return cfg.lr_max
    if step < peak:
        return cfg.lr_min + span * step / peak
    if step == last:
        return cfg.lr_min
    return cfg.lr_max - span * (step - peak) / (last - peak)
