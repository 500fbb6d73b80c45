"""
Array geometry: arrival angles, element index scheme, steering vectors, path loss.

Element order everywhere in rimsa is chain-major: element n belongs to RF chain
n // N_E. Each chain drives a contiguous n_ex x n_ey patch; patches tile the
aperture n_rx wide and n_ry tall. The steering vector evaluates each element at
its aperture coordinates (i_1 along y, i_2 along z).
"""

from typing import Sequence, Tuple
import math

import numpy as np

from rimsa.config import SystemConfig
from rimsa.errors import DomainError, GeometryError

_ANGLE_TOL = 1e-12


def angles_from_positions(
    user_pos: Sequence[float], bs_pos: Sequence[float]
) -> Tuple[float, float, float]:
    """Return (sin(phi)cos(theta), sin(theta), distance) for a user seen from the RIMSA."""
    diff = np.asarray(user_pos, dtype=np.float64) - np.asarray(bs_pos, dtype=np.float64)
    distance = float(np.sqrt(np.sum(diff * diff)))
    if distance == 0.0:
        raise GeometryError("user and RIMSA positions coincide (zero distance)")
    return float(diff[1] / distance), float(diff[2] / distance), distance


def element_indices(cfg: SystemConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Aperture coordinates (i_1, i_2) of every element in chain-major order.

    With enforce_square_aperture the aperture must be sqrt(N_t) x sqrt(N_t);
    the coordinates then cover exactly the raster pairs of the square scheme.
    """
    if cfg.enforce_square_aperture:
        side = math.isqrt(cfg.n_t)
        if side * side != cfg.n_t or cfg.aperture_x != cfg.aperture_y:
            raise GeometryError(
                f"square-aperture index scheme needs N_t to be a perfect square laid out "
                f"sqrt(N_t) x sqrt(N_t); got N_t={cfg.n_t} as "
                f"{cfg.aperture_x} x {cfg.aperture_y} (set enforce_square_aperture=false "
                "for rectangular apertures)"
            )

    n = np.arange(cfg.n_t)
    chain, elem = np.divmod(n, cfg.n_e)
    chain_y, chain_x = np.divmod(chain, cfg.n_rx)
    elem_y, elem_x = np.divmod(elem, cfg.n_ex)
    i1 = chain_x * cfg.n_ex + elem_x
    i2 = chain_y * cfg.n_ey + elem_y
    return i1, i2


def steering_vector(cfg: SystemConfig, sin_phi_cos_theta: float, sin_theta: float) -> np.ndarray:
    """Unit-modulus array response of length N_t."""
    if abs(sin_phi_cos_theta) > 1 + _ANGLE_TOL or abs(sin_theta) > 1 + _ANGLE_TOL:
        raise DomainError(
            f"direction cosines out of range: ({sin_phi_cos_theta}, {sin_theta})"
        )
    i1, i2 = element_indices(cfg)
    k = 2.0 * math.pi * cfg.d_r / cfg.wavelength
    return np.exp(1j * k * (i1 * sin_phi_cos_theta + i2 * sin_theta))


def path_loss(distance: float, cfg: SystemConfig) -> float:
    """Large-scale gain L_1 * d^-rho."""
    if distance <= 0:
        raise DomainError(f"path loss needs a positive distance, got {distance}")
    return cfg.pathloss_ref * distance ** (-cfg.pathloss_exp)
