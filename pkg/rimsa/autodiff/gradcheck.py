"""Central-difference gradient checking."""

from typing import Callable, Optional

import numpy as np

from rimsa.autodiff.tensor import DTensor, no_grad


def grad_check(
    f: Callable[[DTensor], DTensor],
    x: DTensor,
    eps: float = 1e-6,
    coords: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """
    Compare reverse-mode and central-difference gradients of scalar f at x.

    Returns max |g_ad - g_fd| / max(1, |g_fd|) over the checked coordinates.
    `coords` caps the number of coordinates (sampled without replacement).
    """
    if not 1e-7 <= eps <= 1e-4:
        raise ValueError(f"eps must lie in [1e-7, 1e-4], got {eps}")
    if not x.requires_grad:
        if x.is_leaf and not hasattr(x, "frozen"):
            x.requires_grad_(True)
        else:
            raise ValueError("grad_check needs a leaf tensor that takes gradients")

    x.zero_grad()
    f(x).backward()
    g_ad = x.grad.reshape(-1).copy()
    x.zero_grad()

    if not x.data.flags.c_contiguous:
        x.data = np.ascontiguousarray(x.data)
    flat = x.data.reshape(-1)
    indices = np.arange(flat.size)
    if coords is not None and coords < flat.size:
        rng = rng if rng is not None else np.random.default_rng(0)
        indices = rng.choice(flat.size, size=coords, replace=False)

    worst = 0.0
    with no_grad():
        for i in indices:
            saved = flat[i]
            flat[i] = saved + eps
            f_plus = float(f(x).data.sum())
            flat[i] = saved - eps
            f_minus = float(f(x).data.sum())
            flat[i] = saved
            g_fd = (f_plus - f_minus) / (2.0 * eps)
            worst = max(worst, abs(g_ad[i] - g_fd) / max(1.0, abs(g_fd)))
    return worst
