"""Neural network layers built on rimsa.autodiff."""

from .activations import GELU, Hardtanh, LeakyReLU, ReLU, Sigmoid
from .attention import MultiHeadAttention, SpatialAttention, causal_mask
from .blocks import FeedForward, ResidualStage, SqueezeExcite
from .conv import Conv1d, DepthwiseConv1d, MaxPool1d
from .linear import Linear, PositionalEmbedding
from .module import Module, ModuleList, normal_init
from .norm import BatchNorm1d, LayerNorm
from .recurrent import LSTM, BiLSTM
from .registry import LAYER_REGISTRY, LayerSpec, build_layer, build_sequence

__all__ = [
    "GELU",
    "Hardtanh",
    "LeakyReLU",
    "ReLU",
    "Sigmoid",
    "MultiHeadAttention",
    "SpatialAttention",
    "causal_mask",
    "FeedForward",
    "ResidualStage",
    "SqueezeExcite",
    "Conv1d",
    "DepthwiseConv1d",
    "MaxPool1d",
    "Linear",
    "PositionalEmbedding",
    "Module",
    "ModuleList",
    "normal_init",
    "BatchNorm1d",
    "LayerNorm",
    "LSTM",
    "BiLSTM",
    "LAYER_REGISTRY",
    "LayerSpec",
    "build_layer",
    "build_sequence",
]
