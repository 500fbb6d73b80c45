"""Composite blocks: feed-forward, squeeze-excitation, depthwise residual stage."""

from typing import Optional

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor
from rimsa.nn.activations import GELU
from rimsa.nn.conv import DepthwiseConv1d
from rimsa.nn.linear import Linear
from rimsa.nn.module import Module


class FeedForward(Module):
    """Linear(dim, expansion*dim) -> GELU -> Linear(expansion*dim, dim)."""

    def __init__(
        self,
        dim: int,
        expansion: int = 4,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.up = Linear(dim, expansion * dim, rng, init_std)
        self.act = GELU()
        self.down = Linear(expansion * dim, dim, rng, init_std)

    def forward(self, x: DTensor) -> DTensor:
        return self.down(self.act(self.up(x)))


class SqueezeExcite(Module):
    """x * sigmoid(W2 relu(W1 mean_T(x))) on (B, C, T) maps."""

    def __init__(
        self,
        channels: int,
        reduction: int = 16,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.hidden = max(1, channels // reduction)
        self.squeeze = Linear(channels, self.hidden, rng, init_std)
        self.excite = Linear(self.hidden, channels, rng, init_std)

    def gate(self, x: DTensor) -> DTensor:
        """Per-channel weights in (0, 1), shape (B, C)."""
        pooled = ops.mean(x, axis=-1)
        return ops.sigmoid(self.excite(ops.relu(self.squeeze(pooled))))

    def forward(self, x: DTensor) -> DTensor:
        s = self.gate(x)
        return ops.mul(x, ops.reshape(s, s.shape[0], s.shape[1], 1))


class ResidualStage(Module):
    """Two parallel depthwise k=3 branches summed, SE recalibration, skip connection."""

    def __init__(
        self,
        channels: int,
        reduction: int = 16,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.branch_a = DepthwiseConv1d(channels, 3, rng, init_std)
        self.branch_b = DepthwiseConv1d(channels, 3, rng, init_std)
        self.se = SqueezeExcite(channels, reduction, rng, init_std)

    def forward(self, x: DTensor) -> DTensor:
        mixed = ops.add(self.branch_a(x), self.branch_b(x))
        return ops.add(x, self.se(mixed))
