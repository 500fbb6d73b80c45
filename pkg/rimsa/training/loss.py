"""
Hybrid training loss: channel MSE, negative rate utility, and ZF precoder matching.

All three terms are differentiable through the controller outputs; the ZF
target M is computed from detached phases and acts as a constant.
"""

from dataclasses import dataclass
from typing import Literal
import math

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.complex import ComplexPair, abs2, cmatmul
from rimsa.autodiff.tensor import DTensor
from rimsa.config import SystemConfig
from rimsa.controller.model import ControllerOutput
from rimsa.errors import ShapeError
from rimsa.precoding.zf import zf_precoder
from rimsa.system.beamforming import build_v

Utility = Literal["sum", "maxmin"]


@dataclass
class LossBreakdown:
    total: DTensor
    l_mse: DTensor
    l_rate: DTensor
    l_fro: DTensor

    def values(self) -> dict:
        return {
            "total": self.total.item(),
            "l_mse": self.l_mse.item(),
            "l_rate": self.l_rate.item(),
            "l_fro": self.l_fro.item(),
        }


def split_complex(z: np.ndarray) -> ComplexPair:
    """(B, ...) complex array as a constant Re/Im pair."""
    return ComplexPair.from_numpy(z)


def pair_from_stacked(t: DTensor) -> ComplexPair:
    """(B, 2, ...) tensor to a pair of (B, ...) tensors."""
    return ComplexPair(
        ops.getitem(t, (slice(None), 0)),
        ops.getitem(t, (slice(None), 1)),
    )


def equivalent_channel_pair(phases: DTensor, h: ComplexPair, n_r: int, n_e: int) -> ComplexPair:
    """
    H_eq = V^H H for batched phases (B, N_t) and channels (B, N_t, K).

    Element n of chain r contributes exp(j alpha_n) h_n / sqrt(N_E) to row r.
    """
    batch, n_t = phases.shape
    k_users = h.re.shape[-1]
    c = ops.reshape(ops.cos(phases), batch, n_r, n_e, 1)
    s = ops.reshape(ops.sin(phases), batch, n_r, n_e, 1)
    hr = ops.reshape(h.re, batch, n_r, n_e, k_users)
    hi = ops.reshape(h.im, batch, n_r, n_e, k_users)
    inv = 1.0 / math.sqrt(n_e)
    re = ops.mul(ops.sum(ops.sub(ops.mul(c, hr), ops.mul(s, hi)), axis=2), inv)
    im = ops.mul(ops.sum(ops.add(ops.mul(c, hi), ops.mul(s, hr)), axis=2), inv)
    return ComplexPair(re, im)


def rate_tensor(phases: DTensor, w: ComplexPair, h: ComplexPair, cfg: SystemConfig) -> DTensor:
    """Per-user rates R_k (B, K) in bits/s/Hz."""
    h_eq = equivalent_channel_pair(phases, h, cfg.n_r, cfg.n_e)
    gains = abs2(cmatmul(w.H(), h_eq))  # [b, i, k] = |w_i^H h_eq,k|^2
    k_users = gains.shape[-1]
    signal = ops.sum(ops.mul(gains, np.eye(k_users)), axis=1)
    interference = ops.sub(ops.sum(gains, axis=1), signal)
    sinr = ops.div(signal, ops.add(interference, cfg.noise_dl_mw))
    return ops.mul(ops.log(ops.add(sinr, 1.0)), 1.0 / math.log(2.0))


def smooth_min(rates: DTensor, temperature: float) -> DTensor:
    """-(1/tau) logsumexp(-tau R) over users; tends to min_k R_k as tau grows."""
    return ops.mul(ops.logsumexp(ops.mul(rates, -temperature), axis=-1), -1.0 / temperature)


def zf_targets(phases: np.ndarray, h: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Stacked (B, 2, N_R, K) ZF precoders on V(phases)^H H, one per sample."""
    targets = np.empty((phases.shape[0], 2, cfg.n_r, cfg.k_users))
    for b in range(phases.shape[0]):
        v = build_v(phases[b], cfg)
        m = zf_precoder(v.hermitian() @ h[b], cfg.p_data_mw).w
        targets[b, 0], targets[b, 1] = m.real, m.imag
    return targets


def utility_loss(rates: DTensor, utility: Utility, temperature: float) -> DTensor:
    """Negative batch-mean utility."""
    if utility == "maxmin":
        per_sample = smooth_min(rates, temperature)
    else:
        per_sample = ops.sum(rates, axis=-1)
    return ops.neg(ops.mean(per_sample))


def hybrid_loss(
    out: ControllerOutput,
    h_truth: np.ndarray,
    cfg: SystemConfig,
    lambda_rate: float,
    lambda_pre: float = 0.1,
    utility: Utility = "sum",
    temperature: float = 10.0,
) -> LossBreakdown:
    """
    total = l_mse + lambda_rate * l_rate + lambda_pre * l_fro, batch-averaged.

    h_truth is complex (B, N_t, K) or (N_t, K) for a single sample.
    """
    h_truth = np.asarray(h_truth)
    if h_truth.ndim == 2:
        h_truth = h_truth[None]
    expected = (out.batch_size, cfg.n_t, cfg.k_users)
    if h_truth.shape != expected:
        raise ShapeError(f"h_truth has shape {h_truth.shape}, expected {expected}")

    h_pair = split_complex(h_truth)
    est = pair_from_stacked(out.h_est)
    l_mse = ops.mean(ops.sum(abs2(est - h_pair), axis=(1, 2)))

    w_pair = pair_from_stacked(out.w)
    l_rate = utility_loss(rate_tensor(out.phases, w_pair, h_pair, cfg), utility, temperature)

    target = DTensor(zf_targets(out.phases.data, h_truth, cfg))
    diff = ops.sub(out.w, target)
    l_fro = ops.mean(ops.sum(ops.mul(diff, diff), axis=(1, 2, 3)))

    total = ops.add(l_mse, ops.add(ops.mul(l_rate, lambda_rate), ops.mul(l_fro, lambda_pre)))
    return LossBreakdown(total=total, l_mse=l_mse, l_rate=l_rate, l_fro=l_fro)
