"""
Pilot preprocessing: Re/Im stacking, conv + GELU + BN, pooling, BiLSTM.

Input (B, 2N_R, L) pilot maps become (B, L // 2, 2N_R) time-major features.
"""

from typing import Optional, Union

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor
from rimsa.errors import ShapeError
from rimsa.nn import GELU, BiLSTM, LayerSpec, Module, build_layer
from rimsa.system.pilots import PilotBlock

PilotInput = Union[PilotBlock, np.ndarray, DTensor]


def stack_pilots(y) -> np.ndarray:
    """
    Real (B, 2N_R, L) map with the real parts in the first N_R rows.

    Accepts a PilotBlock, a complex (N_R, L) / (B, N_R, L) array, or a real
    (B, 2, N_R, L) array as stored in dataset files.
    """
    if isinstance(y, PilotBlock):
        y = y.y
    y = np.asarray(y)
    if np.iscomplexobj(y):
        if y.ndim == 2:
            y = y[None]
        if y.ndim != 3:
            raise ShapeError(f"complex pilots must be (N_R, L) or (B, N_R, L), got {y.shape}")
        return np.concatenate([y.real, y.imag], axis=1).astype(np.float64)
    if y.ndim == 4 and y.shape[1] == 2:
        return y.reshape(y.shape[0], 2 * y.shape[2], y.shape[3]).astype(np.float64)
    if y.ndim == 3:
        return y.astype(np.float64)
    raise ShapeError(f"cannot interpret pilot array of shape {y.shape}")


def rms_scale(x: np.ndarray) -> np.ndarray:
    """Per-sample 1/RMS, shaped to broadcast over (B, C, T); zero maps keep scale 1."""
    rms = np.sqrt(np.mean(x * x, axis=(1, 2)))
    return (1.0 / np.where(rms > 0, rms, 1.0))[:, None, None]


class Preprocessor(Module):
    def __init__(self, n_r: int, rng: Optional[np.random.Generator] = None, init_std: float = 0.02):
        super().__init__()
        width = 2 * n_r
        self.width = width
        self.conv = build_layer(
            LayerSpec(kind="conv1d", in_dim=width, out_dim=width, kernel=3), rng, init_std
        )
        self.act = GELU()
        self.norm = build_layer(LayerSpec(kind="batchnorm1d", in_dim=width))
        self.pool = build_layer(LayerSpec(kind="maxpool1d", window=2))
        self.lstm = BiLSTM(width, n_r, rng, init_std)

    def forward(self, y: PilotInput) -> DTensor:
        if isinstance(y, DTensor):
            x = y
        else:
            x = DTensor(stack_pilots(y))
        if x.ndim != 3 or x.shape[1] != self.width:
            raise ShapeError(f"pilot map must be (B, {self.width}, L), got {x.shape}")
        if x.shape[2] < 2:
            raise ShapeError(f"pilot length must be >= 2, got {x.shape[2]}")

        x = ops.mul(x, rms_scale(x.data))
        x = self.norm(self.act(self.conv(x)))
        pooled = ops.transpose(self.pool(x), (0, 2, 1))
        return ops.add(self.lstm(pooled), pooled)
