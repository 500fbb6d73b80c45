"""Differentiable primitives over DTensor, plus the operator overloads."""

from typing import Optional, Sequence, Tuple, Union
import math

import numpy as np
from scipy import special

from rimsa.autodiff.tensor import DTensor, as_tensor, make_result, unbroadcast
from rimsa.errors import DomainError, ShapeError

Operand = Union[DTensor, float, int, np.ndarray]
Axis = Optional[Union[int, Tuple[int, ...]]]


def _check_broadcast(op: str, a: DTensor, b: DTensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from e


# -- arithmetic -------------------------------------------------------------


def add(a: Operand, b: Operand) -> DTensor:
    """Elementwise sum with numpy broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a, b)

    def grad_fn(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return make_result(a.data + b.data, (a, b), grad_fn)


def sub(a: Operand, b: Operand) -> DTensor:
    """Elementwise difference with numpy broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a, b)

    def grad_fn(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return make_result(a.data - b.data, (a, b), grad_fn)


def neg(a: Operand) -> DTensor:
    """Negation."""
    a = as_tensor(a)
    return make_result(-a.data, (a,), lambda g: (-g,))


def mul(a: Operand, b: Operand) -> DTensor:
    """Elementwise product; each gradient is the other operand, unbroadcast."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("mul", a, b)

    def grad_fn(g):
        return unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)

    return make_result(a.data * b.data, (a, b), grad_fn)


def div(a: Operand, b: Operand) -> DTensor:
    """Elementwise quotient."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("div", a, b)

    def grad_fn(g):
        return (
            unbroadcast(g / b.data, a.shape),
            unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        )

    return make_result(a.data / b.data, (a, b), grad_fn)


def power(a: Operand, exponent: float) -> DTensor:
    """Raise to a constant real exponent."""
    a = as_tensor(a)
    p = float(exponent)
    return make_result(a.data**p, (a,), lambda g: (g * p * a.data ** (p - 1),))


def matmul(a: Operand, b: Operand) -> DTensor:
    """Batched matrix product over the last two axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs at least 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: inner dimensions differ, {a.shape} @ {b.shape}")
    try:
        out = a.data @ b.data
    except ValueError as e:
        raise ShapeError(f"matmul: batch dimensions differ, {a.shape} @ {b.shape}") from e

    def grad_fn(g):
        return (
            unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.shape),
            unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.shape),
        )

    return make_result(out, (a, b), grad_fn)


# -- shape --------------------------------------------------------------------


def transpose(a: Operand, axes: Optional[Sequence[int]] = None) -> DTensor:
    """Permute axes; reverses them when axes is None."""
    a = as_tensor(a)
    perm = tuple(reversed(range(a.ndim))) if axes is None else tuple(axes)
    if sorted(p % a.ndim for p in perm) != list(range(a.ndim)):
        raise ShapeError(f"transpose: {perm} is not a permutation of {a.ndim} axes")
    inverse = tuple(np.argsort([p % a.ndim for p in perm]))
    return make_result(np.transpose(a.data, perm), (a,), lambda g: (np.transpose(g, inverse),))


def swapaxes(a: Operand, axis1: int, axis2: int) -> DTensor:
    """Swap two axes."""
    a = as_tensor(a)
    perm = list(range(a.ndim))
    perm[axis1], perm[axis2] = perm[axis2], perm[axis1]
    return transpose(a, perm)


def reshape(a: Operand, *shape) -> DTensor:
    """Reshape; the gradient is reshaped back to the input shape."""
    a = as_tensor(a)
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = tuple(shape[0])
    try:
        out = a.data.reshape(shape)
    except ValueError as e:
        raise ShapeError(f"cannot reshape {a.shape} into {shape}") from e
    return make_result(out, (a,), lambda g: (g.reshape(a.shape),))


def concat(tensors: Sequence[Operand], axis: int = 0) -> DTensor:
    """Join tensors along an existing axis."""
    parts = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: incompatible shapes {[p.shape for p in parts]}") from e
    bounds = np.cumsum([p.shape[axis] for p in parts])[:-1]

    def grad_fn(g):
        return np.split(g, bounds, axis=axis)

    return make_result(out, parts, grad_fn)


def stack(tensors: Sequence[Operand], axis: int = 0) -> DTensor:
    """Join tensors along a new axis."""
    parts = [as_tensor(t) for t in tensors]
    try:
        out = np.stack([p.data for p in parts], axis=axis)
    except ValueError as e:
        raise ShapeError(f"stack: incompatible shapes {[p.shape for p in parts]}") from e

    def grad_fn(g):
        return [np.take(g, i, axis=axis) for i in range(len(parts))]

    return make_result(out, parts, grad_fn)


def _is_basic_index(index) -> bool:
    items = index if isinstance(index, tuple) else (index,)
    return all(
        isinstance(i, (int, np.integer, slice)) or i is None or i is Ellipsis for i in items
    )


def getitem(a: Operand, index) -> DTensor:
    """Index or slice a tensor.

    Basic indices scatter the gradient by slice assignment. Advanced indices use
    np.add.at so repeated positions accumulate.
    """
    a = as_tensor(a)
    out = a.data[index]
    basic = _is_basic_index(index)

    def grad_fn(g):
        ga = np.zeros_like(a.data)
        if basic:
            ga[index] += g
        else:
            np.add.at(ga, index, g)
        return (ga,)

    return make_result(np.array(out, dtype=np.float64), (a,), grad_fn)


def broadcast_to(a: Operand, shape: Tuple[int, ...]) -> DTensor:
    """Broadcast to shape; the gradient is summed back over the expanded axes."""
    a = as_tensor(a)
    try:
        out = np.broadcast_to(a.data, shape).copy()
    except ValueError as e:
        raise ShapeError(f"cannot broadcast {a.shape} to {shape}") from e
    return make_result(out, (a,), lambda g: (unbroadcast(g, a.shape),))


# -- reductions -----------------------------------------------------------------


def _normalize_axes(axis: Axis, ndim: int) -> Optional[Tuple[int, ...]]:
    if axis is None:
        return None
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return tuple(sorted(ax % ndim for ax in axes))


def sum(a: Operand, axis: Axis = None, keepdims: bool = False) -> DTensor:  # noqa: A001
    a = as_tensor(a)
    axes = _normalize_axes(axis, a.ndim)
    out = np.sum(a.data, axis=axes, keepdims=keepdims)

    def grad_fn(g):
        if axes is not None and not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, a.shape).copy(),)

    return make_result(np.asarray(out), (a,), grad_fn)


def mean(a: Operand, axis: Axis = None, keepdims: bool = False) -> DTensor:
    """Arithmetic mean over axis."""
    a = as_tensor(a)
    axes = _normalize_axes(axis, a.ndim)
    count = a.size if axes is None else math.prod(a.shape[ax] for ax in axes)
    return mul(sum(a, axes, keepdims), 1.0 / count)


# -- elementwise ----------------------------------------------------------------


def exp(a: Operand) -> DTensor:
    """Elementwise exponential."""
    a = as_tensor(a)
    out = np.exp(a.data)
    return make_result(out, (a,), lambda g: (g * out,))


def log(a: Operand) -> DTensor:
    """Natural log; inputs must be positive."""
    a = as_tensor(a)
    if np.any(a.data <= 0):
        raise DomainError(f"log of non-positive value (min {float(np.min(a.data))})")
    return make_result(np.log(a.data), (a,), lambda g: (g / a.data,))


def sqrt(a: Operand) -> DTensor:
    """Elementwise square root."""
    a = as_tensor(a)
    if np.any(a.data <= 0):
        raise DomainError(f"sqrt of non-positive value (min {float(np.min(a.data))})")
    out = np.sqrt(a.data)
    return make_result(out, (a,), lambda g: (g * 0.5 / out,))


def sin(a: Operand) -> DTensor:
    """Elementwise sine."""
    a = as_tensor(a)
    return make_result(np.sin(a.data), (a,), lambda g: (g * np.cos(a.data),))


def cos(a: Operand) -> DTensor:
    """Elementwise cosine."""
    a = as_tensor(a)
    return make_result(np.cos(a.data), (a,), lambda g: (-g * np.sin(a.data),))


def tanh(a: Operand) -> DTensor:
    """Hyperbolic tangent."""
    a = as_tensor(a)
    out = np.tanh(a.data)
    return make_result(out, (a,), lambda g: (g * (1.0 - out * out),))


def sigmoid(a: Operand) -> DTensor:
    """Logistic function, evaluated without overflow for large |x|."""
    a = as_tensor(a)
    out = special.expit(a.data)
    return make_result(out, (a,), lambda g: (g * out * (1.0 - out),))


def maximum(a: Operand, b: Operand) -> DTensor:
    """Elementwise maximum; ties send the gradient to the first operand."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("maximum", a, b)
    pick_a = a.data >= b.data

    def grad_fn(g):
        return unbroadcast(g * pick_a, a.shape), unbroadcast(g * ~pick_a, b.shape)

    return make_result(np.maximum(a.data, b.data), (a, b), grad_fn)


def where(condition: np.ndarray, a: Operand, b: Operand) -> DTensor:
    """Select from a where the constant mask is true, else from b."""
    a, b = as_tensor(a), as_tensor(b)
    cond = np.asarray(condition, dtype=bool)

    def grad_fn(g):
        return unbroadcast(g * cond, a.shape), unbroadcast(g * ~cond, b.shape)

    return make_result(np.where(cond, a.data, b.data), (a, b), grad_fn)


def clip(a: Operand, lo: float, hi: float) -> DTensor:
    """Clamp into [lo, hi]; the gradient is zero outside the interval."""
    a = as_tensor(a)
    inside = (a.data > lo) & (a.data < hi)
    return make_result(np.clip(a.data, lo, hi), (a,), lambda g: (g * inside,))


def detach(a: Operand) -> DTensor:
    """Copy the value and cut it out of the graph."""
    return DTensor(as_tensor(a).data.copy())


# -- activations ----------------------------------------------------------------


def relu(a: Operand) -> DTensor:
    """Rectified linear unit."""
    a = as_tensor(a)
    mask = a.data > 0
    return make_result(a.data * mask, (a,), lambda g: (g * mask,))


def leaky_relu(a: Operand, slope: float = 0.01) -> DTensor:
    """ReLU with a small slope for negative inputs."""
    a = as_tensor(a)
    factor = np.where(a.data > 0, 1.0, slope)
    return make_result(a.data * factor, (a,), lambda g: (g * factor,))


def hardtanh(a: Operand, lo: float = -1.0, hi: float = 1.0) -> DTensor:
    """Clamp into [lo, hi] with unit slope inside."""
    return clip(a, lo, hi)


def gelu(a: Operand) -> DTensor:
    """x * Phi(x) with the exact normal CDF."""
    a = as_tensor(a)
    cdf = 0.5 * (1.0 + special.erf(a.data / math.sqrt(2.0)))
    pdf = np.exp(-0.5 * a.data * a.data) / math.sqrt(2.0 * math.pi)
    return make_result(a.data * cdf, (a,), lambda g: (g * (cdf + a.data * pdf),))


def softmax(a: Operand, axis: int = -1) -> DTensor:
    """Softmax along axis, shifted by the max for stability."""
    a = as_tensor(a)
    shifted = a.data - np.max(a.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / np.sum(e, axis=axis, keepdims=True)

    def grad_fn(g):
        return (s * (g - np.sum(g * s, axis=axis, keepdims=True)),)

    return make_result(s, (a,), grad_fn)


def logsumexp(a: Operand, axis: int = -1, keepdims: bool = False) -> DTensor:
    """Stable log of summed exponentials along axis."""
    a = as_tensor(a)
    m = np.max(a.data, axis=axis, keepdims=True)
    out = add(log(sum(exp(sub(a, m)), axis=axis, keepdims=True)), m)
    if keepdims:
        return out
    return reshape(out, np.squeeze(out.data, axis=axis).shape)


# -- layer primitives ------------------------------------------------------------


def conv1d(
    x: Operand,
    weight: Operand,
    bias: Optional[Operand] = None,
    padding: int = 0,
    dilation: int = 1,
    groups: int = 1,
) -> DTensor:
    """
    Cross-correlation of x (B, C_in, T) with weight (C_out, C_in/groups, k).

    Zero padding on both ends; output length T + 2*padding - dilation*(k-1).
    """
    x, weight = as_tensor(x), as_tensor(weight)
    if x.ndim != 3 or weight.ndim != 3:
        raise ShapeError(
            f"conv1d expects (B, C, T) input and 3-D weight, got {x.shape}, {weight.shape}"
        )
    n, c_in, t = x.shape
    c_out, c_group, k = weight.shape
    if c_in % groups or c_out % groups or c_group != c_in // groups:
        raise ShapeError(
            f"conv1d: {c_in} input / {c_out} output channels incompatible with "
            f"weight {weight.shape} and groups={groups}"
        )
    t_out = t + 2 * padding - dilation * (k - 1)
    if t_out < 1:
        raise ShapeError(f"conv1d: sequence of length {t} too short for kernel {k}")

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding)))
    cols = np.stack([xp[:, :, j * dilation : j * dilation + t_out] for j in range(k)], axis=2)
    cols = cols.reshape(n, groups, c_group, k, t_out)
    wg = weight.data.reshape(groups, c_out // groups, c_group, k)
    out = np.einsum("gocj,ngcjt->ngot", wg, cols).reshape(n, c_out, t_out)

    parents = [x, weight]
    if bias is not None:
        bias = as_tensor(bias)
        out = out + bias.data[None, :, None]
        parents.append(bias)

    def grad_fn(g):
        gg = g.reshape(n, groups, c_out // groups, t_out)
        gw = np.einsum("ngot,ngcjt->gocj", gg, cols).reshape(weight.shape)
        gcols = np.einsum("gocj,ngot->ngcjt", wg, gg).reshape(n, c_in, k, t_out)
        gxp = np.zeros_like(xp)
        for j in range(k):
            gxp[:, :, j * dilation : j * dilation + t_out] += gcols[:, :, j, :]
        grads = [gxp[:, :, padding : padding + t], gw]
        if bias is not None:
            grads.append(g.sum(axis=(0, 2)))
        return grads

    return make_result(out, parents, grad_fn)


def maxpool1d(x: Operand, window: int = 2) -> DTensor:
    """Non-overlapping max over the last axis; an incomplete tail window is dropped."""
    x = as_tensor(x)
    t = x.shape[-1]
    if t < window:
        raise ShapeError(f"maxpool1d: length {t} shorter than window {window}")
    t_out = t // window
    lead = x.shape[:-1]
    windows = x.data[..., : t_out * window].reshape(*lead, t_out, window)
    idx = np.argmax(windows, axis=-1)[..., None]
    out = np.take_along_axis(windows, idx, axis=-1)[..., 0]

    def grad_fn(g):
        gw = np.zeros_like(windows)
        np.put_along_axis(gw, idx, g[..., None], axis=-1)
        gx = np.zeros_like(x.data)
        gx[..., : t_out * window] = gw.reshape(*lead, t_out * window)
        return (gx,)

    return make_result(out, (x,), grad_fn)


def _install_operators() -> None:
    DTensor.__add__ = lambda self, other: add(self, other)
    DTensor.__radd__ = lambda self, other: add(other, self)
    DTensor.__sub__ = lambda self, other: sub(self, other)
    DTensor.__rsub__ = lambda self, other: sub(other, self)
    DTensor.__mul__ = lambda self, other: mul(self, other)
    DTensor.__rmul__ = lambda self, other: mul(other, self)
    DTensor.__truediv__ = lambda self, other: div(self, other)
    DTensor.__rtruediv__ = lambda self, other: div(other, self)
    DTensor.__neg__ = lambda self: neg(self)
    DTensor.__pow__ = lambda self, p: power(self, p)
    DTensor.__matmul__ = lambda self, other: matmul(self, other)
    DTensor.__rmatmul__ = lambda self, other: matmul(other, self)
    DTensor.__getitem__ = lambda self, index: getitem(self, index)
    DTensor.sum = lambda self, axis=None, keepdims=False: sum(self, axis, keepdims)
    DTensor.mean = lambda self, axis=None, keepdims=False: mean(self, axis, keepdims)
    DTensor.reshape = lambda self, *shape: reshape(self, *shape)
    DTensor.transpose = lambda self, axes=None: transpose(self, axes)


_install_operators()
