"""Minimal reverse-mode automatic differentiation over float64 arrays."""

from . import ops
from .checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from .complex import ComplexPair, abs2, cmatmul, cmul, expj, frobenius2
from .gradcheck import grad_check
from .tensor import DTensor, Parameter, as_tensor, is_grad_enabled, no_grad

__all__ = [
    "ops",
    "load_checkpoint",
    "read_checkpoint",
    "save_checkpoint",
    "ComplexPair",
    "abs2",
    "cmatmul",
    "cmul",
    "expj",
    "frobenius2",
    "grad_check",
    "DTensor",
    "Parameter",
    "as_tensor",
    "is_grad_enabled",
    "no_grad",
]
