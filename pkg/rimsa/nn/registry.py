"""Declarative layer factory."""

from typing import Dict, Literal, Optional

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from rimsa.nn.activations import GELU, Hardtanh, LeakyReLU, ReLU, Sigmoid
from rimsa.nn.attention import MultiHeadAttention, SpatialAttention
from rimsa.nn.blocks import FeedForward, ResidualStage, SqueezeExcite
from rimsa.nn.conv import Conv1d, DepthwiseConv1d, MaxPool1d
from rimsa.nn.linear import Linear, PositionalEmbedding
from rimsa.nn.module import Module
from rimsa.nn.norm import BatchNorm1d, LayerNorm
from rimsa.nn.recurrent import BiLSTM

logger = structlog.get_logger(__name__)

LayerKind = Literal[
    "linear",
    "conv1d",
    "dwconv",
    "batchnorm1d",
    "layernorm",
    "maxpool1d",
    "bilstm",
    "mha",
    "causal_mha",
    "spatial_attention",
    "ffn",
    "se",
    "residual_stage",
    "positional_embedding",
    "gelu",
    "relu",
    "sigmoid",
    "leaky_relu",
    "hardtanh",
]

ATTENTION_KINDS = {"mha", "causal_mha", "spatial_attention"}


class LayerSpec(BaseModel):
    """Dimensions of one layer; unused fields are ignored by the chosen kind."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: LayerKind
    in_dim: Optional[PositiveInt] = None
    out_dim: Optional[PositiveInt] = None
    kernel: PositiveInt = 3
    dilation: PositiveInt = 1
    heads: PositiveInt = 1
    hidden: Optional[PositiveInt] = None
    expansion: PositiveInt = 4
    reduction: PositiveInt = 16
    max_seq: Optional[PositiveInt] = None
    slope: float = 0.01
    lo: float = -1.0
    hi: float = 1.0
    window: PositiveInt = 2

    @model_validator(mode="after")
    def _check_heads(self) -> "LayerSpec":
        if self.kind in ATTENTION_KINDS:
            width = self.out_dim or self.in_dim
            if width is None:
                raise ValueError(f"{self.kind} needs in_dim or out_dim")
            if width % self.heads:
                raise ValueError(f"{self.kind}: width {width} not divisible by heads {self.heads}")
        return self

    @property
    def width(self) -> int:
        """Feature width the layer keeps; out_dim wins over in_dim."""
        width = self.out_dim or self.in_dim
        if width is None:
            raise ValueError(f"{self.kind} needs in_dim or out_dim")
        return width


LAYER_REGISTRY: Dict[str, Dict] = {
    "linear": {
        "class": Linear,
        "build": lambda s, rng, std: Linear(s.in_dim, s.out_dim, rng, std),
    },
    "conv1d": {
        "class": Conv1d,
        "build": lambda s, rng, std: Conv1d(
            s.in_dim, s.out_dim or s.in_dim, s.kernel, s.dilation, rng=rng, init_std=std
        ),
    },
    "dwconv": {
        "class": DepthwiseConv1d,
        "build": lambda s, rng, std: DepthwiseConv1d(s.width, s.kernel, rng, std),
    },
    "batchnorm1d": {
        "class": BatchNorm1d,
        "build": lambda s, rng, std: BatchNorm1d(s.width),
    },
    "layernorm": {
        "class": LayerNorm,
        "build": lambda s, rng, std: LayerNorm(s.width),
    },
    "maxpool1d": {
        "class": MaxPool1d,
        "build": lambda s, rng, std: MaxPool1d(s.window),
    },
    "bilstm": {
        "class": BiLSTM,
        "build": lambda s, rng, std: BiLSTM(s.in_dim, s.hidden or s.in_dim, rng, std),
    },
    "mha": {
        "class": MultiHeadAttention,
        "build": lambda s, rng, std: MultiHeadAttention(s.width, s.heads, False, rng, std),
    },
    "causal_mha": {
        "class": MultiHeadAttention,
        "build": lambda s, rng, std: MultiHeadAttention(s.width, s.heads, True, rng, std),
    },
    "spatial_attention": {
        "class": SpatialAttention,
        "build": lambda s, rng, std: SpatialAttention(s.width, s.heads, rng, std),
    },
    "ffn": {
        "class": FeedForward,
        "build": lambda s, rng, std: FeedForward(s.width, s.expansion, rng, std),
    },
    "se": {
        "class": SqueezeExcite,
        "build": lambda s, rng, std: SqueezeExcite(s.width, s.reduction, rng, std),
    },
    "residual_stage": {
        "class": ResidualStage,
        "build": lambda s, rng, std: ResidualStage(s.width, s.reduction, rng, std),
    },
    "positional_embedding": {
        "class": PositionalEmbedding,
        "build": lambda s, rng, std: PositionalEmbedding(s.max_seq, s.width, rng, std),
    },
    "gelu": {"class": GELU, "build": lambda s, rng, std: GELU()},
    "relu": {"class": ReLU, "build": lambda s, rng, std: ReLU()},
    "sigmoid": {"class": Sigmoid, "build": lambda s, rng, std: Sigmoid()},
    "leaky_relu": {"class": LeakyReLU, "build": lambda s, rng, std: LeakyReLU(s.slope)},
    "hardtanh": {"class": Hardtanh, "build": lambda s, rng, std: Hardtanh(s.lo, s.hi)},
}


def build_layer(
    spec: LayerSpec,
    rng: Optional[np.random.Generator] = None,
    init_std: float = 0.02,
) -> Module:
    """Instantiate the layer described by `spec`."""
    entry = LAYER_REGISTRY[spec.kind]
    rng = rng if rng is not None else np.random.default_rng(0)
    layer = entry["build"](spec, rng, init_std)
    logger.debug("layer built", kind=spec.kind, parameters=layer.num_parameters())
    return layer


def build_sequence(specs, rng: Optional[np.random.Generator] = None, init_std: float = 0.02):
    """Build each spec in order."""
    return [build_layer(s, rng, init_std) for s in specs]
