"""
Zero-forcing precoding on the equivalent channel H_eq = V^H H.

The ZF target doubles as the precoder-matching term of the training loss and as
the perfect-CSI upper reference in evaluations and sweeps.
"""

from typing import List, Optional, Tuple
import math

import numpy as np
import structlog

from rimsa.config import SystemConfig
from rimsa.errors import ShapeError, SingularMatrixError
from rimsa.system.beamforming import PhaseConfig, build_v, random_phases
from rimsa.system.rates import PrecodingMatrix, as_array, max_min_rate, sum_rate

logger = structlog.get_logger(__name__)


def equivalent_channel(h, v) -> np.ndarray:
    """H_eq = V^H H (N_R x K)."""
    hm, vm = as_array(h), as_array(v)
    if hm.shape[0] != vm.shape[0]:
        raise ShapeError(f"V has {vm.shape[0]} rows but H has {hm.shape[0]}")
    return vm.conj().T @ hm


def default_regularization(h_eq: np.ndarray) -> float:
    """1e-9 * trace(H_eq^H H_eq) / K."""
    k_users = h_eq.shape[1]
    return 1e-9 * float(np.real(np.vdot(h_eq, h_eq))) / k_users


def zf_precoder(h_eq: np.ndarray, p_max: float, reg: Optional[float] = None) -> PrecodingMatrix:
    """
    Regularized ZF: M0 = H_eq (H_eq^H H_eq + reg I)^-1.

    Columns are then rescaled to ||m_k||^2 = min(||m0_k||^2, p_max); all-zero
    columns stay zero. reg=None selects default_regularization.
    """
    h_eq = np.asarray(h_eq, dtype=np.complex128)
    n_r, k_users = h_eq.shape
    if n_r < k_users:
        raise ShapeError(f"ZF needs N_R >= K, got N_R={n_r}, K={k_users}")

    reg = default_regularization(h_eq) if reg is None else float(reg)
    if reg < 0:
        raise ValueError(f"regularization must be >= 0, got {reg}")

    gram = h_eq.conj().T @ h_eq
    if not np.any(gram):
        return PrecodingMatrix(w=np.zeros_like(h_eq))

    if reg == 0.0 and np.linalg.matrix_rank(h_eq) < k_users:
        raise SingularMatrixError(
            "equivalent channel is rank deficient; use a regularization reg > 0"
        )
    try:
        # Solve (gram + reg I) X = I rather than forming an explicit inverse.
        inv = np.linalg.solve(gram + reg * np.eye(k_users), np.eye(k_users))
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(
            f"ZF system is singular ({e}); use a regularization reg > 0"
        ) from e
    m0 = h_eq @ inv

    norms2 = np.sum(np.abs(m0) ** 2, axis=0)
    target = np.minimum(norms2, p_max)
    scale = np.sqrt(np.divide(target, norms2, out=np.zeros_like(norms2), where=norms2 > 0))
    return PrecodingMatrix(w=m0 * scale[None, :])


def reference_pipeline(h, phases, cfg: SystemConfig) -> Tuple[float, float]:
    """Sum rate and max-min rate of ZF with perfect CSI under the given phases."""
    v = build_v(phases if isinstance(phases, PhaseConfig) else PhaseConfig(phases), cfg)
    w = zf_precoder(equivalent_channel(h, v), cfg.p_data_mw)
    return (
        sum_rate(h, v, w, cfg.noise_dl_mw),
        max_min_rate(h, v, w, cfg.noise_dl_mw),
    )


def _co_phasing(h: np.ndarray, cfg: SystemConfig) -> PhaseConfig:
    """RF chain r aligns its elements to user r mod K (alpha = -arg h)."""
    alpha = np.empty(cfg.n_t)
    for r in range(cfg.n_r):
        sl = slice(r * cfg.n_e, (r + 1) * cfg.n_e)
        alpha[sl] = -np.angle(h[sl, r % cfg.k_users])
    return PhaseConfig(alpha)


def oracle_phases(
    h, cfg: SystemConfig, rng: np.random.Generator, n_random: int = 16
) -> PhaseConfig:
    """Pick the candidate phase configuration with the best ZF sum rate."""
    hm = as_array(h)
    candidates: List[PhaseConfig] = [PhaseConfig(np.zeros(cfg.n_t)), _co_phasing(hm, cfg)]
    candidates += [random_phases(cfg, rng) for _ in range(n_random)]

    best, best_rate = candidates[0], -math.inf
    for phases in candidates:
        rate, _ = reference_pipeline(hm, phases, cfg)
        if rate > best_rate:
            best, best_rate = phases, rate
    logger.debug("oracle phases selected", candidates=len(candidates), sum_rate=best_rate)
    return best
