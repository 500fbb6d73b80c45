"""Output heads: phases, digital precoder, channel estimate."""

from typing import Optional
import math

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor
from rimsa.nn import GELU, LayerNorm, LayerSpec, Linear, Module, build_layer


class _ExpansionHead(Module):
    """Linear(N_P, hidden) -> GELU -> LayerNorm -> Linear(hidden, out)."""

    def __init__(
        self,
        n_p: int,
        hidden: int,
        out_dim: int,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        self.expand = Linear(n_p, hidden, rng, init_std)
        self.act = GELU()
        self.norm = LayerNorm(hidden)
        self.out = Linear(hidden, out_dim, rng, init_std)

    def pre_activation(self, x: DTensor) -> DTensor:
        return self.out(self.norm(self.act(self.expand(x))))


class PhaseHead(_ExpansionHead):
    """Phases in [-pi, pi] via pi * hardtanh."""

    def __init__(self, n_p: int, hidden: int, n_t: int, rng=None, init_std: float = 0.02):
        super().__init__(n_p, hidden, n_t, rng, init_std)
        self.clamp = build_layer(LayerSpec(kind="hardtanh"))

    def forward(self, x: DTensor) -> DTensor:
        return ops.mul(self.clamp(self.pre_activation(x)), math.pi)


class PrecoderHead(_ExpansionHead):
    """
    W as a (B, 2, N_R, K) Re/Im tensor.

    The raw output is scaled by sqrt(P_max / N_R), then every column k is
    multiplied by min(1, sqrt(P_max) / ||w_k||).
    """

    def __init__(
        self, n_p: int, hidden: int, n_r: int, k_users: int, rng=None, init_std: float = 0.02
    ):
        super().__init__(n_p, hidden, 2 * n_r * k_users, rng, init_std)
        self.n_r = n_r
        self.k_users = k_users

    def forward(self, x: DTensor, p_max: float) -> DTensor:
        raw = ops.reshape(self.pre_activation(x), x.shape[0], 2, self.n_r, self.k_users)
        w = ops.mul(raw, math.sqrt(p_max / self.n_r))
        norm2 = ops.sum(ops.mul(w, w), axis=(1, 2), keepdims=True)
        # 1 / sqrt(max(1, ||w_k||^2 / P)) == min(1, sqrt(P) / ||w_k||)
        factor = ops.div(1.0, ops.sqrt(ops.maximum(ops.mul(norm2, 1.0 / p_max), 1.0)))
        return ops.mul(w, factor)


class ChannelHead(Module):
    """Linear(N_P, hidden) -> LeakyReLU(0.01) -> Linear(hidden, 2 N_t K), as (B, 2, N_t, K)."""

    def __init__(
        self,
        n_p: int,
        hidden: int,
        n_t: int,
        k_users: int,
        scale: float = 1.0,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        self.n_t = n_t
        self.k_users = k_users
        self.scale = scale
        self.expand = Linear(n_p, hidden, rng, init_std)
        self.act = build_layer(LayerSpec(kind="leaky_relu", slope=0.01))
        self.out = Linear(hidden, 2 * n_t * k_users, rng, init_std)

    def forward(self, x: DTensor) -> DTensor:
        raw = self.out(self.act(self.expand(x)))
        return ops.mul(ops.reshape(raw, x.shape[0], 2, self.n_t, self.k_users), self.scale)
