"""Temporal multi-head attention and channel-wise spatial attention on (B, T, D)."""

from typing import Optional
import math

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor, Parameter
from rimsa.errors import ShapeError
from rimsa.nn.linear import Linear
from rimsa.nn.module import Module, normal_init


def causal_mask(length: int) -> np.ndarray:
    """0 on and below the diagonal, -inf strictly above."""
    mask = np.zeros((length, length))
    mask[np.triu_indices(length, k=1)] = -np.inf
    return mask


class MultiHeadAttention(Module):
    """
    softmax(Q K^T / sqrt(d_head)) V per head, heads concatenated then projected.

    With causal=True every query position t only sees keys 0..t.
    """

    def __init__(
        self,
        dim: int,
        heads: int,
        causal: bool = False,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        if dim % heads:
            raise ShapeError(f"attention width {dim} is not divisible by {heads} heads")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.causal = causal
        self.q_proj = Linear(dim, dim, rng, init_std)
        self.k_proj = Linear(dim, dim, rng, init_std)
        self.v_proj = Linear(dim, dim, rng, init_std)
        self.out_proj = Linear(dim, dim, rng, init_std)
        self.last_weights: Optional[np.ndarray] = None

    def _split(self, x: DTensor, batch: int, length: int) -> DTensor:
        x = ops.reshape(x, batch, length, self.heads, self.head_dim)
        return ops.transpose(x, (0, 2, 1, 3))

    def forward(self, x: DTensor) -> DTensor:
        if x.ndim != 3 or x.shape[2] != self.dim:
            raise ShapeError(f"attention expects (B, T, {self.dim}), got {x.shape}")
        batch, length, _ = x.shape
        q = self._split(self.q_proj(x), batch, length)
        k = self._split(self.k_proj(x), batch, length)
        v = self._split(self.v_proj(x), batch, length)

        scores = ops.mul(ops.matmul(q, ops.swapaxes(k, -1, -2)), 1.0 / math.sqrt(self.head_dim))
        if self.causal:
            scores = ops.add(scores, causal_mask(length))
        weights = ops.softmax(scores, axis=-1)
        self.last_weights = weights.data

        context = ops.transpose(ops.matmul(weights, v), (0, 2, 1, 3))
        return self.out_proj(ops.reshape(context, batch, length, self.dim))


class SpatialAttention(Module):
    """
    Attention across feature channels instead of time.

    Per head h the channel group C = X_h^T (d_head x T) is mixed by
    A = softmax(W_h C C^T / sqrt(T)) and the result (A C)^T is fused back.
    W = 0 gives uniform weights: every channel becomes its group's mean.
    """

    def __init__(
        self,
        dim: int,
        heads: int,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        if dim % heads:
            raise ShapeError(f"spatial attention width {dim} is not divisible by {heads} heads")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.affinity = Parameter(normal_init(rng, (heads, self.head_dim, self.head_dim), init_std))

    def forward(self, x: DTensor) -> DTensor:
        if x.ndim != 3 or x.shape[2] != self.dim:
            raise ShapeError(f"spatial attention expects (B, T, {self.dim}), got {x.shape}")
        batch, length, _ = x.shape
        channels = ops.transpose(
            ops.reshape(x, batch, length, self.heads, self.head_dim), (0, 2, 3, 1)
        )
        gram = ops.matmul(channels, ops.swapaxes(channels, -1, -2))
        scores = ops.mul(ops.matmul(self.affinity, gram), 1.0 / math.sqrt(length))
        mixed = ops.matmul(ops.softmax(scores, axis=-1), channels)
        return ops.reshape(ops.transpose(mixed, (0, 3, 1, 2)), batch, length, self.dim)
