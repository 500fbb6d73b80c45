"""The four-stage controller: pilots in, phases / precoder / channel estimate out."""

from dataclasses import dataclass
from typing import Optional, Tuple
import math

import numpy as np
import structlog

from rimsa.autodiff.tensor import DTensor
from rimsa.channel.geometry import path_loss
from rimsa.config import ControllerConfig, SystemConfig
from rimsa.controller.backbone import Backbone
from rimsa.controller.heads import ChannelHead, PhaseHead, PrecoderHead
from rimsa.controller.preprocessor import PilotInput, Preprocessor
from rimsa.controller.st_attention import SpatioTemporalAttention
from rimsa.nn import Module
from rimsa.system.beamforming import PhaseConfig
from rimsa.system.rates import PrecodingMatrix
from rimsa.utils.rng import stream

logger = structlog.get_logger(__name__)

ST_FFN_EXPANSION = 4


@dataclass
class ControllerOutput:
    """
    Batched controller outputs.

    phases: (B, N_t) radians; w: (B, 2, N_R, K) and h_est: (B, 2, N_t, K)
    hold real and imaginary parts along axis 1.
    """

    phases: DTensor
    w: DTensor
    h_est: DTensor

    @property
    def batch_size(self) -> int:
        return int(self.phases.shape[0])

    def phase_config(self, i: int = 0) -> PhaseConfig:
        return PhaseConfig(self.phases.data[i])

    def precoder(self, i: int = 0) -> PrecodingMatrix:
        w = self.w.data[i]
        return PrecodingMatrix(w=w[0] + 1j * w[1])

    def channel_estimate(self, i: int = 0) -> np.ndarray:
        h = self.h_est.data[i]
        return h[0] + 1j * h[1]


def default_channel_scale(sys_cfg: SystemConfig) -> float:
    """Path-loss amplitude at the centre of the user region."""
    return math.sqrt(path_loss(sys_cfg.reference_distance(), sys_cfg))


class RimsaController(Module):
    def __init__(self, sys_cfg: SystemConfig, ctrl_cfg: ControllerConfig):
        super().__init__()
        self.sys_cfg = sys_cfg
        self.ctrl_cfg = ctrl_cfg
        rng = stream(ctrl_cfg.seed, "init")
        std = ctrl_cfg.init_std
        width = 2 * sys_cfg.n_r

        self.preprocessor = Preprocessor(sys_cfg.n_r, rng, std)
        self.st_attention = SpatioTemporalAttention(
            width, ctrl_cfg.st_heads, ST_FFN_EXPANSION, rng, std
        )
        self.backbone = Backbone(
            width,
            ctrl_cfg.n_p,
            ctrl_cfg.n_layers,
            ctrl_cfg.heads,
            ctrl_cfg.ffn_expansion,
            ctrl_cfg.max_seq,
            ctrl_cfg.residual_stages,
            ctrl_cfg.se_reduction,
            ctrl_cfg.pooling,
            rng,
            std,
        )
        self.phase_head = PhaseHead(ctrl_cfg.n_p, ctrl_cfg.phase_hidden, sys_cfg.n_t, rng, std)
        self.precoder_head = PrecoderHead(
            ctrl_cfg.n_p, ctrl_cfg.phase_hidden, sys_cfg.n_r, sys_cfg.k_users, rng, std
        )
        scale = ctrl_cfg.channel_scale or default_channel_scale(sys_cfg)
        self.channel_head = ChannelHead(
            ctrl_cfg.n_p, ctrl_cfg.channel_hidden, sys_cfg.n_t, sys_cfg.k_users, scale, rng, std
        )

        if ctrl_cfg.freeze_backbone:
            freeze_backbone(self)
        self.name_parameters()

        trainable, frozen = parameter_counts(self)
        logger.info(
            f"Controller built: {trainable} trainable / {trainable + frozen} total parameters",
            n_p=ctrl_cfg.n_p,
            n_layers=ctrl_cfg.n_layers,
        )

    def embed(self, y: PilotInput) -> DTensor:
        """X_LLM (B, N_P) for a pilot batch."""
        return self.backbone(self.st_attention(self.preprocessor(y)))

    def forward(self, y: PilotInput, p_max: Optional[float] = None) -> ControllerOutput:
        p_max = self.sys_cfg.p_data_mw if p_max is None else p_max
        x_llm = self.embed(y)
        return ControllerOutput(
            phases=self.phase_head(x_llm),
            w=self.precoder_head(x_llm, p_max),
            h_est=self.channel_head(x_llm),
        )


def freeze_backbone(model: RimsaController) -> int:
    """Mark decoder attention and FFN weights frozen; everything else stays trainable."""
    count = model.backbone.freeze()
    logger.debug("backbone frozen", tensors=count)
    return count


def parameter_counts(model: Module) -> Tuple[int, int]:
    """(trainable, frozen) scalar counts."""
    params = model.parameters()
    frozen = sum(p.size for p in params if p.frozen)
    return sum(p.size for p in params) - frozen, frozen


def estimate_parameter_counts(
    sys_cfg: SystemConfig, ctrl_cfg: ControllerConfig
) -> Tuple[int, int]:
    """(trainable, frozen) counts computed from the dimensions alone."""
    w = 2 * sys_cfg.n_r
    hd = sys_cfg.n_r
    p = ctrl_cfg.n_p

    def linear(i: int, o: int) -> int:
        return i * o + o

    def ffn(d: int, e: int) -> int:
        return linear(d, e * d) + linear(e * d, d)

    def mha(d: int) -> int:
        return 4 * linear(d, d)

    preprocessor = (w * w * 3 + w) + 2 * w + 2 * (w * 4 * hd + hd * 4 * hd + 4 * hd)
    st_head_dim = w // ctrl_cfg.st_heads
    st_attention = (
        mha(w) + ctrl_cfg.st_heads * st_head_dim**2 + ffn(w, ST_FFN_EXPANSION) + 2 * w
    )

    decoder_frozen_part = mha(p) + ffn(p, ctrl_cfg.ffn_expansion)
    decoder_norms = 2 * (2 * p)
    se_hidden = max(1, p // ctrl_cfg.se_reduction)
    stage = 2 * (3 * p + p) + linear(p, se_hidden) + linear(se_hidden, p)
    backbone_trainable = (
        linear(w, p)
        + ctrl_cfg.max_seq * p
        + ctrl_cfg.n_layers * decoder_norms
        + 2 * p
        + ctrl_cfg.residual_stages * stage
    )
    backbone_frozen = ctrl_cfg.n_layers * decoder_frozen_part

    hp, hc = ctrl_cfg.phase_hidden, ctrl_cfg.channel_hidden
    k = sys_cfg.k_users
    phase = linear(p, hp) + 2 * hp + linear(hp, sys_cfg.n_t)
    precoder = linear(p, hp) + 2 * hp + linear(hp, 2 * sys_cfg.n_r * k)
    channel = linear(p, hc) + linear(hc, 2 * sys_cfg.n_t * k)

    trainable = preprocessor + st_attention + backbone_trainable + phase + precoder + channel
    if ctrl_cfg.freeze_backbone:
        return trainable, backbone_frozen
    return trainable + backbone_frozen, 0
