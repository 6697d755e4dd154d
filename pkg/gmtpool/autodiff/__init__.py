"""Minimal dense-tensor engine with reverse-mode differentiation and Adam."""

from gmtpool.autodiff import ops  # noqa: F401
from gmtpool.autodiff.memory import AllocationCounter, count_allocations  # noqa: F401
from gmtpool.autodiff.nn import Dropout, LayerNorm, Linear, Module, RowFF  # noqa: F401
from gmtpool.autodiff.optim import Adam, adam_step  # noqa: F401
from gmtpool.autodiff.tensor import Parameter, Tensor, backward, no_grad  # noqa: F401


def rff(x: Tensor, params: RowFF) -> Tensor:
    """Apply a shared row-wise feed-forward block to every row of *x*."""
    return params(x)


def layer_norm(x: Tensor, gamma: Parameter, beta: Parameter) -> Tensor:
    return ops.layer_norm(x, gamma, beta)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return ops.matmul(a, b)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    return ops.softmax(x, axis)


__all__ = [
    "Adam",
    "AllocationCounter",
    "Dropout",
    "LayerNorm",
    "Linear",
    "Module",
    "Parameter",
    "RowFF",
    "Tensor",
    "adam_step",
    "backward",
    "count_allocations",
    "layer_norm",
    "matmul",
    "no_grad",
    "ops",
    "rff",
    "softmax",
]
