"""
Reverse-mode tensor: a float64 array plus the tape node that produced it.

Each non-leaf DTensor keeps its parents and a grad_fn mapping the upstream
gradient to one gradient per parent (None for parents that need none).
backward() walks the graph once in reverse topological order without recursion.
"""

from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple
import threading

import numpy as np

from rimsa.errors import ShapeError

GradFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()


def is_grad_enabled() -> bool:
    return getattr(_state, "enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording in the current thread."""
    previous = is_grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = previous


class DTensor:
    """Differentiable dense real array."""

    # ndarray (op) DTensor defers to the reflected DTensor operator.
    __array_ufunc__ = None

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: Tuple["DTensor", ...] = (),
        _grad_fn: Optional[GradFn] = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self._grad: Optional[np.ndarray] = None
        self._requires_grad = requires_grad
        self._parents = _parents
        self._grad_fn = _grad_fn

    # -- basic properties -------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def requires_grad(self) -> bool:
        return self._requires_grad

    def requires_grad_(self, flag: bool = True) -> "DTensor":
        self._requires_grad = flag
        return self

    @property
    def is_leaf(self) -> bool:
        return self._grad_fn is None

    @property
    def grad(self) -> np.ndarray:
        """Accumulated gradient; zeros until a backward pass reaches this tensor."""
        if self._grad is None:
            return np.zeros_like(self.data)
        return self._grad

    @grad.setter
    def grad(self, value: Optional[np.ndarray]) -> None:
        self._grad = None if value is None else np.asarray(value, dtype=np.float64)

    def has_grad(self) -> bool:
        return self._grad is not None

    def zero_grad(self) -> None:
        self._grad = None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def __len__(self) -> int:
        return int(self.data.shape[0])

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"DTensor(shape={self.shape}{flag})"

    # -- backward -----------------------------------------------------------

    def _accumulate(self, g: np.ndarray) -> None:
        if self._grad is None:
            self._grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self._grad = self._grad + g

    def _topological_order(self) -> List["DTensor"]:
        order: List[DTensor] = []
        visited = set()
        stack: List[Tuple[DTensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Propagate d(self)/d(leaf) into every reachable leaf's grad."""
        if grad is None:
            if self.data.size != 1:
                raise ShapeError(f"backward() needs a scalar loss, got shape {self.shape}")
            grad = np.ones_like(self.data)
        else:
            grad = np.asarray(grad, dtype=np.float64)
            if grad.shape != self.shape:
                raise ShapeError(f"seed gradient shape {grad.shape} != tensor shape {self.shape}")
        if not self.requires_grad:
            return

        pending = {id(self): grad}
        for node in reversed(self._topological_order()):
            g = pending.pop(id(node), None)
            if g is None:
                continue
            if node._grad_fn is None:
                node._accumulate(g)
                continue
            for parent, pg in zip(node._parents, node._grad_fn(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                pending[key] = pending[key] + pg if key in pending else pg


class Parameter(DTensor):
    """Trainable leaf tensor. Frozen parameters take no gradient and no update."""

    def __init__(self, data, name: str = "", frozen: bool = False):
        super().__init__(np.array(data, dtype=np.float64, copy=True), requires_grad=True)
        self.name = name
        self.frozen = frozen

    @property
    def requires_grad(self) -> bool:
        return not self.frozen

    def __repr__(self) -> str:
        return f"Parameter(name={self.name!r}, shape={self.shape}, frozen={self.frozen})"


def as_tensor(value) -> DTensor:
    return value if isinstance(value, DTensor) else DTensor(value)


def make_result(data: np.ndarray, parents: Sequence[DTensor], grad_fn: GradFn) -> DTensor:
    """Wrap an op's output, recording the tape node only when a parent needs grad."""
    parents = tuple(parents)
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        return DTensor(data, requires_grad=True, _parents=parents, _grad_fn=grad_fn)
    return DTensor(data)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad
