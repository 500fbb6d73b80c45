"""Orthogonal uplink pilots and pilot reception through V."""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from rimsa.channel.rician import ChannelRealization
from rimsa.config import SystemConfig
from rimsa.errors import ShapeError
from rimsa.system.beamforming import BeamformingMatrix


@dataclass(frozen=True)
class PilotBlock:
    """Pilot sequences x (K x L) and the received signal y (N_R x L)."""

    x: np.ndarray
    y: np.ndarray


def dft_pilots(cfg: SystemConfig, p_pilot_mw: Optional[float] = None) -> np.ndarray:
    """Row k is sqrt(P) * exp(-j 2 pi k l / L), l = 0..L-1."""
    k_users, length = cfg.k_users, cfg.pilot_len
    if length < k_users:
        raise ShapeError(f"pilot length {length} < number of users {k_users}")
    power = cfg.p_pilot_mw if p_pilot_mw is None else p_pilot_mw
    k = np.arange(k_users)[:, None]
    ell = np.arange(length)[None, :]
    return np.sqrt(power) * np.exp(-2j * np.pi * k * ell / length)


def receive_pilots(
    v: BeamformingMatrix,
    h: Union[ChannelRealization, np.ndarray],
    x: np.ndarray,
    noise_var: float,
    rng: np.random.Generator,
) -> PilotBlock:
    """Y = V^H H X + V^H N with N ~ CN(0, noise_var)."""
    hm = h.h if isinstance(h, ChannelRealization) else np.asarray(h)
    vm = v.v if isinstance(v, BeamformingMatrix) else np.asarray(v)
    if hm.shape[0] != vm.shape[0] or hm.shape[1] != x.shape[0]:
        raise ShapeError(
            f"incompatible shapes: V {vm.shape}, H {hm.shape}, X {x.shape}"
        )
    shape = (hm.shape[0], x.shape[1])
    noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(
        noise_var / 2.0
    )
    y = vm.conj().T @ (hm @ x + noise)
    return PilotBlock(x=x, y=y)
