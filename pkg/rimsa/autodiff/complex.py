"""Complex quantities as (re, im) pairs of DTensors."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from rimsa.autodiff import ops
from rimsa.autodiff.tensor import DTensor, as_tensor


@dataclass(frozen=True)
class ComplexPair:
    re: DTensor
    im: DTensor

    @classmethod
    def from_numpy(cls, z: np.ndarray) -> "ComplexPair":
        z = np.asarray(z)
        return cls(DTensor(np.real(z).astype(np.float64)), DTensor(np.imag(z).astype(np.float64)))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.re.shape

    def numpy(self) -> np.ndarray:
        return self.re.data + 1j * self.im.data

    def conj(self) -> "ComplexPair":
        return ComplexPair(self.re, ops.neg(self.im))

    def mT(self) -> "ComplexPair":
        """Transpose of the last two axes (no conjugation)."""
        return ComplexPair(ops.swapaxes(self.re, -1, -2), ops.swapaxes(self.im, -1, -2))

    def H(self) -> "ComplexPair":
        return self.mT().conj()

    def __add__(self, other: "ComplexPair") -> "ComplexPair":
        return ComplexPair(ops.add(self.re, other.re), ops.add(self.im, other.im))

    def __sub__(self, other: "ComplexPair") -> "ComplexPair":
        return ComplexPair(ops.sub(self.re, other.re), ops.sub(self.im, other.im))

    def scale(self, factor) -> "ComplexPair":
        """Multiply by a real scalar or real tensor (broadcast)."""
        f = as_tensor(factor)
        return ComplexPair(ops.mul(self.re, f), ops.mul(self.im, f))


def cmul(a: ComplexPair, b: ComplexPair) -> ComplexPair:
    """Elementwise product."""
    return ComplexPair(
        ops.sub(ops.mul(a.re, b.re), ops.mul(a.im, b.im)),
        ops.add(ops.mul(a.re, b.im), ops.mul(a.im, b.re)),
    )


def cmatmul(a: ComplexPair, b: ComplexPair) -> ComplexPair:
    return ComplexPair(
        ops.sub(ops.matmul(a.re, b.re), ops.matmul(a.im, b.im)),
        ops.add(ops.matmul(a.re, b.im), ops.matmul(a.im, b.re)),
    )


def abs2(a: ComplexPair) -> DTensor:
    """|z|^2 = re^2 + im^2."""
    return ops.add(ops.mul(a.re, a.re), ops.mul(a.im, a.im))


def frobenius2(a: ComplexPair, axis=None) -> DTensor:
    return ops.sum(abs2(a), axis=axis)


def expj(alpha) -> ComplexPair:
    """exp(j alpha) for real alpha."""
    alpha = as_tensor(alpha)
    return ComplexPair(ops.cos(alpha), ops.sin(alpha))
