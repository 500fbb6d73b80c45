"""
Decoder backbone: token projection, positional table, causal decoder layers,
final norm, residual/SE refinement over the token map, and pooling.
"""

from typing import List, Optional

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor, Parameter
from rimsa.errors import SequenceOverflowError, ShapeError
from rimsa.nn import (
    FeedForward,
    LayerNorm,
    Linear,
    Module,
    ModuleList,
    MultiHeadAttention,
    PositionalEmbedding,
    ResidualStage,
)


class DecoderLayer(Module):
    """Pre-norm block: x + MHA(LN(x)), then x + FFN(LN(x)); attention is causal."""

    def __init__(
        self,
        dim: int,
        heads: int,
        expansion: int,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        self.ln_attn = LayerNorm(dim)
        self.attn = MultiHeadAttention(dim, heads, causal=True, rng=rng, init_std=init_std)
        self.ln_ffn = LayerNorm(dim)
        self.ffn = FeedForward(dim, expansion, rng, init_std)

    def forward(self, x: DTensor) -> DTensor:
        x = ops.add(x, self.attn(self.ln_attn(x)))
        return ops.add(x, self.ffn(self.ln_ffn(x)))

    def frozen_parameters(self) -> List[Parameter]:
        return self.attn.parameters() + self.ffn.parameters()


class Backbone(Module):
    def __init__(
        self,
        width: int,
        n_p: int,
        n_layers: int,
        heads: int,
        expansion: int,
        max_seq: int,
        stages: int = 4,
        se_reduction: int = 16,
        pooling: str = "mean",
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        if pooling not in ("mean", "last"):
            raise ShapeError(f"unknown pooling '{pooling}'")
        self.max_seq = max_seq
        self.pooling = pooling
        self.proj = Linear(width, n_p, rng, init_std)
        self.pos = PositionalEmbedding(max_seq, n_p, rng, init_std)
        self.layers = ModuleList(
            [DecoderLayer(n_p, heads, expansion, rng, init_std) for _ in range(n_layers)]
        )
        self.final_norm = LayerNorm(n_p)
        self.stages = ModuleList(
            [ResidualStage(n_p, se_reduction, rng, init_std) for _ in range(stages)]
        )

    def decode(self, x: DTensor) -> DTensor:
        """Token states (B, T', N_P) after the decoder stack and final norm."""
        length = x.shape[1]
        if length > self.max_seq:
            raise SequenceOverflowError(
                f"{length} tokens exceed the backbone's max_seq ({self.max_seq})"
            )
        h = ops.add(self.proj(x), self.pos(length))
        for layer in self.layers:
            h = layer(h)
        return self.final_norm(h)

    def refine(self, tokens: DTensor) -> DTensor:
        """Residual/SE stages on the (B, N_P, T') channel-major map."""
        feature_map = ops.transpose(tokens, (0, 2, 1))
        for stage in self.stages:
            feature_map = stage(feature_map)
        return feature_map

    def forward(self, x: DTensor) -> DTensor:
        feature_map = self.refine(self.decode(x))
        if self.pooling == "last":
            return ops.getitem(feature_map, (slice(None), slice(None), -1))
        return ops.mean(feature_map, axis=-1)

    def freeze(self) -> int:
        """Freeze decoder attention and FFN weights; returns the number of tensors frozen."""
        frozen = [p for layer in self.layers for p in layer.frozen_parameters()]
        for p in frozen:
            p.frozen = True
        return len(frozen)
