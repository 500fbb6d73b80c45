"""Rician channel realizations and coherence-block episodes."""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from rimsa.channel.geometry import angles_from_positions, path_loss, steering_vector
from rimsa.config import SystemConfig

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class UserSet:
    """K user positions, one (x, y, z) row each."""

    positions: np.ndarray

    def __len__(self) -> int:
        return int(self.positions.shape[0])


@dataclass(frozen=True)
class ChannelRealization:
    """Per-user channels stacked as columns of h (N_t x K)."""

    h: np.ndarray
    h_los: np.ndarray
    h_nlos: np.ndarray
    distances: np.ndarray

    @property
    def n_t(self) -> int:
        return int(self.h.shape[0])

    @property
    def k_users(self) -> int:
        return int(self.h.shape[1])


@dataclass(frozen=True)
class Episode:
    """Coherence blocks sharing one user placement (and therefore one h_los)."""

    user_set: UserSet
    blocks: List[ChannelRealization]


def sample_users(cfg: SystemConfig, rng: np.random.Generator) -> UserSet:
    """Draw K users uniformly in the configured rectangle at fixed height."""
    r = cfg.user_region
    x = rng.uniform(r.x_min, r.x_max, size=cfg.k_users)
    y = rng.uniform(r.y_min, r.y_max, size=cfg.k_users)
    z = np.full(cfg.k_users, r.z, dtype=np.float64)
    return UserSet(positions=np.stack([x, y, z], axis=1))


def los_components(cfg: SystemConfig, users: UserSet) -> Tuple[np.ndarray, np.ndarray]:
    """Deterministic LoS matrix (N_t x K) and user distances."""
    columns = []
    distances = np.empty(len(users), dtype=np.float64)
    for k, pos in enumerate(users.positions):
        s1, s2, d = angles_from_positions(pos, cfg.bs_position)
        columns.append(steering_vector(cfg, s1, s2))
        distances[k] = d
    return np.stack(columns, axis=1), distances


def rician_channel(
    cfg: SystemConfig,
    users: UserSet,
    rng: np.random.Generator,
    los: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> ChannelRealization:
    """Combine LoS and a fresh CN(0, 1) NLoS draw with per-user sqrt(L_k) scaling."""
    h_los, distances = los if los is not None else los_components(cfg, users)
    shape = (cfg.n_t, cfg.k_users)
    h_nlos = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    kf = cfg.rician_k
    a_los = np.sqrt(kf / (kf + 1.0))
    a_nlos = np.sqrt(1.0 / (kf + 1.0))
    gains = np.sqrt(np.array([path_loss(d, cfg) for d in distances]))
    h = gains[None, :] * (a_los * h_los + a_nlos * h_nlos)
    return ChannelRealization(h=h, h_los=h_los, h_nlos=h_nlos, distances=distances)


def generate_episode(
    cfg: SystemConfig,
    n_blocks: int,
    rng: np.random.Generator,
    nlos_rngs: Optional[Sequence[np.random.Generator]] = None,
) -> Episode:
    """
    One placement, one h_los, n_blocks independent NLoS draws.

    Users are drawn from rng. Block b draws its NLoS part from nlos_rngs[b] when
    given, otherwise from rng after the placement.
    """
    if n_blocks < 1:
        raise ValueError(f"n_blocks must be >= 1, got {n_blocks}")
    if nlos_rngs is not None and len(nlos_rngs) != n_blocks:
        raise ValueError(f"expected {n_blocks} NLoS generators, got {len(nlos_rngs)}")
    users = sample_users(cfg, rng)
    los = los_components(cfg, users)
    sources = [rng] * n_blocks if nlos_rngs is None else list(nlos_rngs)
    blocks = [rician_channel(cfg, users, src, los=los) for src in sources]
    logger.debug("episode generated", n_blocks=n_blocks, k_users=cfg.k_users)
    return Episode(user_set=users, blocks=blocks)
