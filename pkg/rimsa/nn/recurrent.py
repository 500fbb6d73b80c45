"""Unidirectional and bidirectional LSTM over (B, T, D) sequences."""

from typing import Optional

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor, Parameter
from rimsa.errors import ShapeError
from rimsa.nn.module import Module, normal_init


class LSTM(Module):
    """
    Standard LSTM cell unrolled over T. Gate order in the packed weights is
    input, forget, cell, output.
    """

    def __init__(
        self,
        in_dim: int,
        hidden: int,
        reverse: bool = False,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.in_dim = in_dim
        self.hidden = hidden
        self.reverse = reverse
        self.w_ih = Parameter(normal_init(rng, (in_dim, 4 * hidden), init_std))
        self.w_hh = Parameter(normal_init(rng, (hidden, 4 * hidden), init_std))
        self.bias = Parameter(np.zeros(4 * hidden))

    def forward(self, x: DTensor) -> DTensor:
        if x.ndim != 3 or x.shape[2] != self.in_dim:
            raise ShapeError(f"LSTM expects (B, T, {self.in_dim}), got {x.shape}")
        batch, length, _ = x.shape
        hd = self.hidden
        projected = ops.add(ops.matmul(x, self.w_ih), self.bias)

        h = DTensor(np.zeros((batch, hd)))
        c = DTensor(np.zeros((batch, hd)))
        outputs = [None] * length
        steps = range(length - 1, -1, -1) if self.reverse else range(length)
        for t in steps:
            gates = ops.add(ops.getitem(projected, (slice(None), t)), ops.matmul(h, self.w_hh))
            i = ops.sigmoid(ops.getitem(gates, (slice(None), slice(0, hd))))
            f = ops.sigmoid(ops.getitem(gates, (slice(None), slice(hd, 2 * hd))))
            g = ops.tanh(ops.getitem(gates, (slice(None), slice(2 * hd, 3 * hd))))
            o = ops.sigmoid(ops.getitem(gates, (slice(None), slice(3 * hd, 4 * hd))))
            c = ops.add(ops.mul(f, c), ops.mul(i, g))
            h = ops.mul(o, ops.tanh(c))
            outputs[t] = h
        return ops.stack(outputs, axis=1)


class BiLSTM(Module):
    """Forward and backward LSTMs; per-step outputs concatenated to 2*hidden."""

    def __init__(
        self,
        in_dim: int,
        hidden: int,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.forward_lstm = LSTM(in_dim, hidden, reverse=False, rng=rng, init_std=init_std)
        self.backward_lstm = LSTM(in_dim, hidden, reverse=True, rng=rng, init_std=init_std)

    def forward(self, x: DTensor) -> DTensor:
        return ops.concat([self.forward_lstm(x), self.backward_lstm(x)], axis=-1)
