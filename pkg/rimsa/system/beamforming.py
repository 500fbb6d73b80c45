"""Phase configurations and the block-diagonal analog beamformer V."""

from dataclasses import dataclass
import math

import numpy as np

from rimsa.config import SystemConfig
from rimsa.errors import ShapeError


def _canonical(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=np.float64)
    outside = np.abs(alpha) > math.pi
    if not np.any(outside):
        return alpha.copy()
    wrapped = np.angle(np.exp(1j * alpha))
    return np.where(outside, wrapped, alpha)


@dataclass(frozen=True, init=False)
class PhaseConfig:
    """Element phases in radians, canonicalized to [-pi, pi]."""

    alpha: np.ndarray

    def __init__(self, alpha):
        object.__setattr__(self, "alpha", _canonical(alpha))

    def __len__(self) -> int:
        return int(self.alpha.shape[0])


@dataclass(frozen=True)
class BeamformingMatrix:
    """Block-diagonal V (N_t x N_R); column r holds exp(-j alpha)/sqrt(N_E) on its own block."""

    v: np.ndarray
    n_e: int

    @property
    def n_r(self) -> int:
        return int(self.v.shape[1])

    def hermitian(self) -> np.ndarray:
        return self.v.conj().T


def build_v(phases: PhaseConfig, cfg: SystemConfig) -> BeamformingMatrix:
    """Build V from phases; chain r owns elements [r*N_E, (r+1)*N_E)."""
    alpha = phases.alpha if isinstance(phases, PhaseConfig) else _canonical(phases)
    if alpha.shape != (cfg.n_t,):
        raise ShapeError(f"expected {cfg.n_t} phases, got shape {alpha.shape}")

    blocks = np.exp(-1j * alpha).reshape(cfg.n_r, cfg.n_e) / math.sqrt(cfg.n_e)
    v = np.zeros((cfg.n_t, cfg.n_r), dtype=np.complex128)
    for r in range(cfg.n_r):
        v[r * cfg.n_e : (r + 1) * cfg.n_e, r] = blocks[r]
    return BeamformingMatrix(v=v, n_e=cfg.n_e)


def random_phases(cfg: SystemConfig, rng: np.random.Generator) -> PhaseConfig:
    """Uniform phases in [-pi, pi)."""
    return PhaseConfig(rng.uniform(-math.pi, math.pi, size=cfg.n_t))
