"""Learned controller: pilots to phases, precoder and channel estimate."""

from .backbone import Backbone, DecoderLayer
from .heads import ChannelHead, PhaseHead, PrecoderHead
from .model import (
    ControllerOutput,
    RimsaController,
    default_channel_scale,
    estimate_parameter_counts,
    freeze_backbone,
    parameter_counts,
)
from .preprocessor import Preprocessor, rms_scale, stack_pilots
from .st_attention import SpatioTemporalAttention

__all__ = [
    "Backbone",
    "DecoderLayer",
    "ChannelHead",
    "PhaseHead",
    "PrecoderHead",
    "ControllerOutput",
    "RimsaController",
    "default_channel_scale",
    "estimate_parameter_counts",
    "freeze_backbone",
    "parameter_counts",
    "Preprocessor",
    "rms_scale",
    "stack_pilots",
    "SpatioTemporalAttention",
]
