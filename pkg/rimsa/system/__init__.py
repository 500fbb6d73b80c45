"""RIMSA signal model: phases, block-diagonal beamformer, pilots and rate metrics."""

from .beamforming import BeamformingMatrix, PhaseConfig, build_v, random_phases
from .pilots import PilotBlock, dft_pilots, receive_pilots
from .rates import PrecodingMatrix, cap_columns, max_min_rate, per_user_rates, sinr, sum_rate

__all__ = [
    "BeamformingMatrix",
    "PhaseConfig",
    "build_v",
    "random_phases",
    "PilotBlock",
    "dft_pilots",
    "receive_pilots",
    "PrecodingMatrix",
    "cap_columns",
    "max_min_rate",
    "per_user_rates",
    "sinr",
    "sum_rate",
]
