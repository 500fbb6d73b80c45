"""AdamW with decoupled weight decay and global-norm gradient clipping."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple
import math

import numpy as np

from rimsa.autodiff.tensor import Parameter


def global_grad_norm(params: Sequence[Parameter]) -> float:
    return math.sqrt(sum(float(np.sum(p.grad * p.grad)) for p in params if p.has_grad()))


def clip_grad_norm(params: Sequence[Parameter], max_norm: float) -> float:
    """Scale all gradients in place so their global L2 norm is at most max_norm."""
    norm = global_grad_norm(params)
    if norm > max_norm > 0:
        factor = max_norm / norm
        for p in params:
            if p.has_grad():
                p.grad = p.grad * factor
    return norm


@dataclass
class AdamWState:
    step: int = 0
    m: Dict[int, np.ndarray] = field(default_factory=dict)
    v: Dict[int, np.ndarray] = field(default_factory=dict)


class AdamW:
    """
    AdamW over a fixed parameter list.

    Frozen parameters are skipped entirely, so their bytes never change.
    """

    def __init__(
        self,
        params: Sequence[Parameter],
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 1e-6,
        grad_clip: float = 1.0,
    ):
        self.params: List[Parameter] = list(params)
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.grad_clip = grad_clip
        self.state = AdamWState()

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self, lr: float) -> float:
        """Clip, then apply one update; returns the pre-clip gradient norm."""
        active = [p for p in self.params if not p.frozen]
        norm = clip_grad_norm(active, self.grad_clip)

        self.state.step += 1
        t = self.state.step
        b1, b2 = self.betas
        for idx, p in enumerate(self.params):
            if p.frozen:
                continue
            g = p.grad
            m = self.state.m.get(idx)
            v = self.state.v.get(idx)
            m = (1 - b1) * g if m is None else b1 * m + (1 - b1) * g
            v = (1 - b2) * g * g if v is None else b2 * v + (1 - b2) * g * g
            self.state.m[idx], self.state.v[idx] = m, v

            m_hat = m / (1 - b1**t)
            v_hat = v / (1 - b2**t)
            update = m_hat / (np.sqrt(v_hat) + self.eps)
            p.data = p.data - lr * self.weight_decay * p.data - lr * update
        return norm


def adamw_step(
    params: Sequence[Parameter],
    grads: Sequence[np.ndarray],
    state: AdamWState,
    lr: float,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
    weight_decay: float = 1e-6,
    grad_clip: float = 1.0,
) -> None:
    """Functional AdamW update with explicit gradients and state."""
    opt = AdamW(params, betas, eps, weight_decay, grad_clip)
    opt.state = state
    for p, g in zip(opt.params, grads):
        p.grad = g
    opt.step(lr)
