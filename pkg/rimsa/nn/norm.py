"""Layer and batch normalization."""

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor, Parameter
from rimsa.errors import ShapeError
from rimsa.nn.module import Module


class LayerNorm(Module):
    """Normalize over the last axis, then scale and shift."""

    def __init__(self, dim: int, eps: float = 1e-5):
        super().__init__()
        self.eps = eps
        self.gamma = Parameter(np.ones(dim))
        self.beta = Parameter(np.zeros(dim))

    def forward(self, x: DTensor) -> DTensor:
        centred = ops.sub(x, ops.mean(x, axis=-1, keepdims=True))
        var = ops.mean(ops.mul(centred, centred), axis=-1, keepdims=True)
        normed = ops.div(centred, ops.sqrt(ops.add(var, self.eps)))
        return ops.add(ops.mul(normed, self.gamma), self.beta)


class BatchNorm1d(Module):
    """
    Per-channel normalization of (B, C, T) maps over batch and time.

    Training uses batch statistics and updates running estimates with
    momentum; evaluation uses the running estimates.
    """

    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.momentum = momentum
        self.eps = eps
        self.gamma = Parameter(np.ones(channels))
        self.beta = Parameter(np.zeros(channels))
        self.register_buffer("running_mean", np.zeros(channels))
        self.register_buffer("running_var", np.ones(channels))

    def forward(self, x: DTensor) -> DTensor:
        if x.ndim != 3:
            raise ShapeError(f"BatchNorm1d expects (B, C, T), got {x.shape}")
        gamma = ops.reshape(self.gamma, 1, -1, 1)
        beta = ops.reshape(self.beta, 1, -1, 1)

        if not self.training:
            mean = self.running_mean.data[None, :, None]
            std = np.sqrt(self.running_var.data + self.eps)[None, :, None]
            return ops.add(ops.mul(ops.sub(x, mean), ops.div(gamma, std)), beta)

        if x.shape[0] < 2:
            raise ShapeError("BatchNorm1d needs a batch of at least 2 samples in training mode")
        mean = ops.mean(x, axis=(0, 2), keepdims=True)
        centred = ops.sub(x, mean)
        var = ops.mean(ops.mul(centred, centred), axis=(0, 2), keepdims=True)
        normed = ops.div(centred, ops.sqrt(ops.add(var, self.eps)))

        n = x.shape[0] * x.shape[2]
        m = self.momentum
        batch_var = var.data.reshape(-1) * (n / max(n - 1, 1))
        self.running_mean.data = (1 - m) * self.running_mean.data + m * mean.data.reshape(-1)
        self.running_var.data = (1 - m) * self.running_var.data + m * batch_var
        return ops.add(ops.mul(normed, gamma), beta)
