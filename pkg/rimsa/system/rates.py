"""Downlink SINR and rate metrics for a given (H, V, W)."""

from dataclasses import dataclass

import numpy as np

from rimsa.channel.rician import ChannelRealization
from rimsa.errors import DomainError, ShapeError
from rimsa.system.beamforming import BeamformingMatrix


@dataclass(frozen=True)
class PrecodingMatrix:
    """Digital precoder W (N_R x K); column k serves user k."""

    w: np.ndarray

    def column_powers(self) -> np.ndarray:
        return np.sum(np.abs(self.w) ** 2, axis=0)

    def is_feasible(self, p_max: float, tol: float = 1e-9) -> bool:
        return bool(np.all(self.column_powers() <= p_max + tol))


def cap_columns(w: np.ndarray, p_max: float) -> np.ndarray:
    """Scale each column by min(1, sqrt(p_max)/||w_k||)."""
    norms = np.sqrt(np.sum(np.abs(w) ** 2, axis=0))
    limit = np.sqrt(p_max)
    scale = np.where(norms > limit, limit / np.where(norms > 0, norms, 1.0), 1.0)
    return w * scale[None, :]


def as_array(obj) -> np.ndarray:
    if isinstance(obj, ChannelRealization):
        return obj.h
    if isinstance(obj, BeamformingMatrix):
        return obj.v
    if isinstance(obj, PrecodingMatrix):
        return obj.w
    return np.asarray(obj)


def _gains(h, v, w) -> np.ndarray:
    """|w_i^H V^H h_k|^2 as a K x K matrix indexed [i, k]."""
    hm, vm, wm = as_array(h), as_array(v), as_array(w)
    if hm.shape[0] != vm.shape[0] or vm.shape[1] != wm.shape[0] or wm.shape[1] != hm.shape[1]:
        raise ShapeError(f"incompatible shapes: H {hm.shape}, V {vm.shape}, W {wm.shape}")
    h_eq = vm.conj().T @ hm
    g = wm.conj().T @ h_eq
    return np.abs(g) ** 2


def _sinr_from_gains(gains: np.ndarray, noise_dl: float) -> np.ndarray:
    signal = np.diag(gains).copy()
    interference = gains.sum(axis=0) - signal
    denom = interference + noise_dl
    undefined = (denom == 0) & (signal == 0)
    if np.any(undefined):
        users = np.flatnonzero(undefined).tolist()
        raise DomainError(f"SINR undefined (zero signal over zero noise) for users {users}")
    with np.errstate(divide="ignore"):
        return signal / denom


def sinr(h, v, w, user_k: int, noise_dl: float) -> float:
    """SINR of user k with interference treated as noise."""
    gains = _gains(h, v, w)
    if not 0 <= user_k < gains.shape[0]:
        raise ShapeError(f"user index {user_k} out of range for K={gains.shape[0]}")
    return float(_sinr_from_gains(gains, noise_dl)[user_k])


def per_user_rates(h, v, w, noise_dl: float) -> np.ndarray:
    """R_k = log2(1 + SINR_k) for every user."""
    return np.log2(1.0 + _sinr_from_gains(_gains(h, v, w), noise_dl))


def sum_rate(h, v, w, noise_dl: float) -> float:
    return float(np.sum(per_user_rates(h, v, w, noise_dl)))


def max_min_rate(h, v, w, noise_dl: float) -> float:
    return float(np.min(per_user_rates(h, v, w, noise_dl)))
