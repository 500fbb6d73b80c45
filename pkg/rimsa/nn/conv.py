"""Length-preserving 1-D convolutions and max pooling on (B, C, T) maps."""

from typing import Optional

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor, Parameter
from rimsa.errors import ShapeError
from rimsa.nn.module import Module, normal_init


class Conv1d(Module):
    """
    Cross-correlation along T with zero padding dilation*(k-1)/2, so T is kept.

    groups=in_channels=out_channels gives a depthwise convolution.
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: int = 3,
        dilation: int = 1,
        groups: int = 1,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__()
        if kernel % 2 == 0:
            raise ShapeError(f"kernel must be odd to preserve length, got {kernel}")
        if in_channels % groups or out_channels % groups:
            raise ShapeError(
                f"channels ({in_channels} -> {out_channels}) not divisible by groups={groups}"
            )
        rng = rng if rng is not None else np.random.default_rng(0)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.dilation = dilation
        self.groups = groups
        self.padding = dilation * (kernel - 1) // 2
        self.weight = Parameter(
            normal_init(rng, (out_channels, in_channels // groups, kernel), init_std)
        )
        self.bias = Parameter(np.zeros(out_channels))

    def forward(self, x: DTensor) -> DTensor:
        if x.ndim != 3 or x.shape[1] != self.in_channels:
            raise ShapeError(
                f"Conv1d expects (B, {self.in_channels}, T), got {x.shape}"
            )
        return ops.conv1d(
            x,
            self.weight,
            self.bias,
            padding=self.padding,
            dilation=self.dilation,
            groups=self.groups,
        )


class DepthwiseConv1d(Conv1d):
    """One kernel per channel; a grouped Conv1d with groups == channels."""

    def __init__(
        self,
        channels: int,
        kernel: int = 3,
        rng: Optional[np.random.Generator] = None,
        init_std: float = 0.02,
    ):
        super().__init__(channels, channels, kernel, groups=channels, rng=rng, init_std=init_std)


class MaxPool1d(Module):
    """Non-overlapping max over windows along the last axis."""

    def __init__(self, window: int = 2):
        super().__init__()
        self.window = window

    def forward(self, x: DTensor) -> DTensor:
        return ops.maxpool1d(x, self.window)
