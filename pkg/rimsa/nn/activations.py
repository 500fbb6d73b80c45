"""Activation layers."""

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor
from rimsa.nn.module import Module


class GELU(Module):
    """GELU with the exact normal CDF."""

    def forward(self, x: DTensor) -> DTensor:
        return ops.gelu(x)


class ReLU(Module):
    def forward(self, x: DTensor) -> DTensor:
        return ops.relu(x)


class Sigmoid(Module):
    def forward(self, x: DTensor) -> DTensor:
        return ops.sigmoid(x)


class LeakyReLU(Module):
    """ReLU that keeps slope * x for negative inputs."""

    def __init__(self, slope: float = 0.01):
        super().__init__()
        self.slope = slope

    def forward(self, x: DTensor) -> DTensor:
        return ops.leaky_relu(x, self.slope)


class Hardtanh(Module):
    """Clamp to [lo, hi]."""

    def __init__(self, lo: float = -1.0, hi: float = 1.0):
        super().__init__()
        self.lo = lo
        self.hi = hi

    def forward(self, x: DTensor) -> DTensor:
        return ops.hardtanh(x, self.lo, self.hi)
