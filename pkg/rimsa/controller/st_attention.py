"""Spatio-temporal attention fusion."""

from typing import Optional

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor
from rimsa.nn import LayerSpec, Module, build_layer


class SpatioTemporalAttention(Module):
    """LayerNorm(x + temporal MHA(x) + spatial attention(x) + FFN(x))."""

    def __init__(
        self,
        width: int,
        heads: int,
        expansion: int = 4,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        self.temporal = build_layer(LayerSpec(kind="mha", in_dim=width, heads=heads), rng, init_std)
        self.spatial = build_layer(
            LayerSpec(kind="spatial_attention", in_dim=width, heads=heads), rng, init_std
        )
        self.ffn = build_layer(
            LayerSpec(kind="ffn", in_dim=width, expansion=expansion), rng, init_std
        )
        self.norm = build_layer(LayerSpec(kind="layernorm", in_dim=width))

    def forward(self, x: DTensor) -> DTensor:
        fused = ops.add(ops.add(x, self.temporal(x)), ops.add(self.spatial(x), self.ffn(x)))
        return self.norm(fused)
