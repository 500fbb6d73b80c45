"""Test-set metrics for the controller and the two reference methods."""

from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np
import structlog

from rimsa.autodiff.tensor import no_grad
from rimsa.config import SystemConfig
from rimsa.errors import EmptyDatasetError
from rimsa.precoding.zf import equivalent_channel, oracle_phases, zf_precoder
from rimsa.system.beamforming import build_v, random_phases
from rimsa.system.rates import per_user_rates
from rimsa.training.dataset import DatasetSplit
from rimsa.utils.rng import stream

logger = structlog.get_logger(__name__)


@dataclass
class EvalMetrics:
    method: str
    sum_rate: float
    max_min: float
    l_mse: Optional[float] = None
    samples: int = 0

    def to_dict(self) -> Dict:
        return asdict(self)


def _require_samples(split: DatasetSplit) -> None:
    if len(split) == 0:
        raise EmptyDatasetError("evaluation split is empty")


def _summarize(method: str, sum_rates, min_rates, l_mse=None) -> EvalMetrics:
    return EvalMetrics(
        method=method,
        sum_rate=float(np.mean(sum_rates)),
        max_min=float(np.mean(min_rates)),
        l_mse=None if l_mse is None else float(np.mean(l_mse)),
        samples=len(sum_rates),
    )


def evaluate(
    model,
    split: DatasetSplit,
    sys_cfg: SystemConfig,
    batch_size: int = 64,
) -> EvalMetrics:
    """
    Mean sum rate, max-min rate and channel MSE with rates scored on the true H.

    The precoder cap and the rates use sys_cfg's downlink power and noise,
    so the same model can be scored at several powers.
    """
    _require_samples(split)
    was_training = model.training
    model.eval()
    sums, mins, mses = [], [], []
    try:
        with no_grad():
            for start in range(0, len(split), batch_size):
                batch = split.batch(range(start, min(start + batch_size, len(split))))
                out = model(batch.y, p_max=sys_cfg.p_data_mw)
                for i in range(len(batch)):
                    v = build_v(out.phase_config(i), sys_cfg)
                    rates = per_user_rates(batch.h[i], v, out.precoder(i), sys_cfg.noise_dl_mw)
                    sums.append(float(np.sum(rates)))
                    mins.append(float(np.min(rates)))
                    err = out.channel_estimate(i) - batch.h[i]
                    mses.append(float(np.sum(np.abs(err) ** 2)))
    finally:
        model.train(was_training)
    return _summarize("model", sums, mins, mses)


def random_baseline(sys_cfg: SystemConfig, split: DatasetSplit, seed: int = 0) -> EvalMetrics:
    """Uniform random phases with ZF on the resulting equivalent channel."""
    _require_samples(split)
    sums, mins = [], []
    for i in range(len(split)):
        v = build_v(random_phases(sys_cfg, stream(seed, "baseline", i)), sys_cfg)
        w = zf_precoder(equivalent_channel(split.h[i], v), sys_cfg.p_data_mw)
        rates = per_user_rates(split.h[i], v, w, sys_cfg.noise_dl_mw)
        sums.append(float(np.sum(rates)))
        mins.append(float(np.min(rates)))
    return _summarize("random", sums, mins)


def zf_reference(
    sys_cfg: SystemConfig, split: DatasetSplit, seed: int = 0, n_random: int = 16
) -> EvalMetrics:
    """Perfect-CSI ZF with oracle-selected phases."""
    _require_samples(split)
    sums, mins = [], []
    for i in range(len(split)):
        phases = oracle_phases(split.h[i], sys_cfg, stream(seed, "oracle", i), n_random)
        v = build_v(phases, sys_cfg)
        w = zf_precoder(equivalent_channel(split.h[i], v), sys_cfg.p_data_mw)
        rates = per_user_rates(split.h[i], v, w, sys_cfg.noise_dl_mw)
        sums.append(float(np.sum(rates)))
        mins.append(float(np.min(rates)))
    metrics = _summarize("zf_oracle", sums, mins)
    logger.debug("zf reference evaluated", samples=metrics.samples, sum_rate=metrics.sum_rate)
    return metrics
