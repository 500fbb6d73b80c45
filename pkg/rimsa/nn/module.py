"""Module base class: parameter/buffer/child registration and mode switching."""

from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from rimsa.autodiff.tensor import Parameter
from rimsa.errors import ShapeError


def normal_init(rng: np.random.Generator, shape: Tuple[int, ...], std: float) -> np.ndarray:
    return rng.normal(0.0, std, size=shape)


class Module:
    """
    Base for every layer.

    Attributes holding a Parameter or a Module are registered automatically;
    buffers (non-trainable state such as running statistics) are registered
    explicitly and travel with checkpoints but never count as parameters.
    """

    def __init__(self) -> None:
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_buffers", {})
        object.__setattr__(self, "_children", {})
        object.__setattr__(self, "training", True)

    def __setattr__(self, name: str, value) -> None:
        if isinstance(value, Parameter) and name not in self._buffers:
            self._params[name] = value
        elif isinstance(value, Module):
            self._children[name] = value
        object.__setattr__(self, name, value)

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def register_buffer(self, name: str, value: np.ndarray) -> Parameter:
        """Attach a frozen, non-trainable tensor that still goes into checkpoints."""
        buf = Parameter(value, name=name, frozen=True)
        self._buffers[name] = buf
        object.__setattr__(self, name, buf)
        return buf

    # -- traversal -----------------------------------------------------------

    def named_children(self) -> Iterator[Tuple[str, "Module"]]:
        yield from self._children.items()

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        """Depth-first (dotted name, parameter) pairs, own parameters first."""
        for name, p in self._params.items():
            yield prefix + name, p
        for name, child in self._children.items():
            yield from child.named_parameters(prefix + name + ".")

    def named_buffers(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        """Buffers in the same order and naming as named_parameters."""
        for name, b in self._buffers.items():
            yield prefix + name, b
        for name, child in self._children.items():
            yield from child.named_buffers(prefix + name + ".")

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def trainable_parameters(self) -> List[Parameter]:
        """Parameters the optimizer updates."""
        return [p for p in self.parameters() if not p.frozen]

    def checkpoint_tensors(self) -> List[Parameter]:
        """Parameters followed by buffers, each named by its dotted path."""
        self.name_parameters()
        return self.parameters() + [b for _, b in self.named_buffers()]

    def name_parameters(self, prefix: str = "") -> None:
        """Write each tensor's dotted path into its name field."""
        for name, p in self.named_parameters(prefix):
            p.name = name
        for name, b in self.named_buffers(prefix):
            b.name = name

    def num_parameters(self, trainable_only: bool = False) -> int:
        params = self.trainable_parameters() if trainable_only else self.parameters()
        return sum(p.size for p in params)

    # -- modes and state --------------------------------------------------------

    def train(self, mode: bool = True) -> "Module":
        """Set training mode on this module and every descendant."""
        object.__setattr__(self, "training", mode)
        for child in self._children.values():
            child.train(mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Copies of every parameter and buffer keyed by dotted name."""
        state = {name: p.data.copy() for name, p in self.named_parameters()}
        state.update({name: b.data.copy() for name, b in self.named_buffers()})
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """Copy values in by name.

        Raises ShapeError for a missing key or a shape mismatch. Extra keys are ignored.
        """
        targets = dict(self.named_parameters())
        targets.update(self.named_buffers())
        missing = targets.keys() - state.keys()
        if missing:
            raise ShapeError(f"state dict is missing {sorted(missing)}")
        for name, target in targets.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != target.shape:
                raise ShapeError(f"'{name}': expected shape {target.shape}, got {value.shape}")
            target.data = value.copy()


class ModuleList(Module):
    """Ordered container; children are named "0", "1", ..."""

    def __init__(self, modules: Optional[Sequence[Module]] = None):
        super().__init__()
        self._items: List[Module] = []
        for m in modules or ():
            self.append(m)

    def append(self, module: Module) -> None:
        self._children[str(len(self._items))] = module
        self._items.append(module)

    def __iter__(self) -> Iterator[Module]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, index: int) -> Module:
        return self._items[index]
