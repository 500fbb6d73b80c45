"""Affine layers and the learnable positional table."""

from typing import Optional

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor, Parameter
from rimsa.errors import SequenceOverflowError
from rimsa.nn.module import Module, normal_init


class Linear(Module):
    """y = x @ W + b over the last axis; W is (in_dim, out_dim)."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
        bias: bool = True,
    ):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weight = Parameter(normal_init(rng, (in_dim, out_dim), init_std))
        self.bias = Parameter(np.zeros(out_dim)) if bias else None

    def forward(self, x: DTensor) -> DTensor:
        y = ops.matmul(x, self.weight)
        return ops.add(y, self.bias) if self.bias is not None else y


class PositionalEmbedding(Module):
    """Rows 0..T-1 of a (max_seq, dim) table."""

    def __init__(
        self,
        max_seq: int,
        dim: int,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        self.max_seq = max_seq
        rng = rng if rng is not None else np.random.default_rng(0)
        self.table = Parameter(normal_init(rng, (max_seq, dim), init_std))

    def forward(self, length: int) -> DTensor:
        if length > self.max_seq:
            raise SequenceOverflowError(
                f"sequence length {length} exceeds the positional table ({self.max_seq})"
            )
        return ops.getitem(self.table, slice(0, length))
