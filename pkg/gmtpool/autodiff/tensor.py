"""Dense float64 tensors with reverse-mode automatic differentiation.

A :class:`Tensor` wraps a NumPy array together with the record of the
operation that produced it (``op``, ``_parents`` and a ``_backward`` closure
mapping the output gradient to one gradient per parent).  Calling
:func:`backward` on a scalar walks that record once in reverse topological
order and accumulates gradients into the leaves.

Tensors are immutable after creation; only ``grad`` of leaf tensors is
written, during backward.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from gmtpool.autodiff import memory
from gmtpool.errors import UsageError

DTYPE = np.float64

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_GRAD_ENABLED = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording; produced tensors keep no parents."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def is_grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """Row-major float64 array that may participate in differentiation."""

    __slots__ = ("data", "requires_grad", "grad", "op", "_parents", "_backward", "__weakref__")

    def __init__(self, data, requires_grad: bool = False) -> None:
        self.data: np.ndarray = np.asarray(data, dtype=DTYPE)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.op = ""
        self._parents: Tuple["Tensor", ...] = ()
        self._backward: Optional[BackwardFn] = None
        memory.on_alloc(self)

    # ------------------------------------------------------------------
    # Construction helpers
    # ------------------------------------------------------------------
    @classmethod
    def from_op(cls, data: np.ndarray, parents: Sequence["Tensor"], backward: BackwardFn, op: str) -> "Tensor":
        """Create the output of an operation, recording provenance when needed."""
        out = cls(data)
        if _GRAD_ENABLED and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward = backward
            out.op = op
        return out

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------
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
    def is_leaf(self) -> bool:
        return not self._parents

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag}{', op=' + self.op if self.op else ''})"

    def __len__(self) -> int:
        return self.data.shape[0]

    # ------------------------------------------------------------------
    # Operator sugar (implemented in gmtpool.autodiff.ops)
    # ------------------------------------------------------------------
    def __add__(self, other):
        from gmtpool.autodiff import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from gmtpool.autodiff import ops

        return ops.sub(self, other)

    def __rsub__(self, other):
        from gmtpool.autodiff import ops

        return ops.sub(other, self)

    def __mul__(self, other):
        from gmtpool.autodiff import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from gmtpool.autodiff import ops

        return ops.div(self, other)

    def __rtruediv__(self, other):
        from gmtpool.autodiff import ops

        return ops.div(other, self)

    def __neg__(self):
        from gmtpool.autodiff import ops

        return ops.neg(self)

    def __matmul__(self, other):
        from gmtpool.autodiff import ops

        return ops.matmul(self, other)

    def __getitem__(self, index):
        from gmtpool.autodiff import ops

        return ops.getitem(self, index)

    @property
    def T(self) -> "Tensor":
        from gmtpool.autodiff import ops

        return ops.swapaxes(self, -1, -2)

    def reshape(self, *shape) -> "Tensor":
        from gmtpool.autodiff import ops

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        from gmtpool.autodiff import ops

        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        from gmtpool.autodiff import ops

        return ops.mean(self, axis=axis, keepdims=keepdims)

    def backward(self) -> None:
        backward(self)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    """First/second moment estimates plus the per-parameter step counter."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, data: np.ndarray) -> "AdamState":
        return cls(m=np.zeros_like(data), v=np.zeros_like(data), step=0)


class Parameter(Tensor):
    """Trainable leaf tensor with a name and optimizer state."""

    __slots__ = ("name", "adam_state")

    def __init__(self, data, name: str = "") -> None:
        super().__init__(np.array(data, dtype=DTYPE), requires_grad=True)
        self.name = name
        self.adam_state: Optional[AdamState] = None

    def assign(self, values: np.ndarray) -> None:
        """Overwrite the payload in place (optimizer updates, checkpoint restore)."""
        values = np.asarray(values, dtype=DTYPE)
        if values.shape != self.data.shape:
            from gmtpool.errors import DimensionError

            raise DimensionError.mismatch(f"assign {self.name}", self.data.shape, values.shape)
        self.data[...] = values

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.shape})"


# ---------------------------------------------------------------------------
# Reverse pass
# ---------------------------------------------------------------------------


def _topological_order(root: Tensor) -> List[Tensor]:
    """Iterative post-order DFS; each producing op is visited exactly once."""
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in reversed(node._parents):
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor, parameters: Optional[Iterable[Parameter]] = None) -> None:
    """Accumulate d(loss)/d(leaf) into ``grad`` of every reachable leaf.

    When *parameters* is given, those not reachable from *loss* receive an
    all-zero gradient instead of staying ``None``.
    """
    if loss.size != 1:
        raise UsageError(f"backward() needs a scalar loss, got shape {loss.shape}", data={"shape": list(loss.shape)})

    if loss.requires_grad:
        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for node in reversed(_topological_order(loss)):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.is_leaf:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            parent_grads = node._backward(g)
            for parent, pg in zip(node._parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg

    if parameters is not None:
        for p in parameters:
            if p.grad is None:
                p.grad = np.zeros_like(p.data)
