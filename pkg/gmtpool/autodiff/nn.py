"""Module base class and the small set of layers the pooling stack needs."""

from __future__ import annotations

from typing import Dict, Iterator, List, Tuple

import numpy as np

from gmtpool.autodiff import ops
from gmtpool.autodiff.tensor import Parameter, Tensor
from gmtpool.errors import DimensionError


class Module:
    """Container that discovers Parameters and sub-Modules from its attributes.

    Attribute insertion order fixes parameter order, so two models built from
    the same seed enumerate (and update) parameters identically.
    """

    training: bool = True

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):  # pragma: no cover – interface
        raise NotImplementedError

    # ------------------------------------------------------------------
    # Parameter traversal
    # ------------------------------------------------------------------
    def _children(self) -> Iterator[Tuple[str, object]]:
        for name, value in vars(self).items():
            if isinstance(value, (Parameter, Module)):
                yield name, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, (Parameter, Module)):
                        yield f"{name}.{i}", item

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        for name, value in self._children():
            full = f"{prefix}{name}"
            if isinstance(value, Parameter):
                yield full, value
            else:
                yield from value.named_parameters(prefix=f"{full}.")

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def modules(self) -> Iterator["Module"]:
        yield self
        for _, value in self._children():
            if isinstance(value, Module):
                yield from value.modules()

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    # ------------------------------------------------------------------
    # Mode / state
    # ------------------------------------------------------------------
    def train(self, mode: bool = True) -> "Module":
        for module in self.modules():
            module.training = mode
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        for name, p in self.named_parameters():
            p.assign(state[name])


# ---------------------------------------------------------------------------
# Initialisers
# ---------------------------------------------------------------------------


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------


class Linear(Module):
    """``y = x W + b`` applied to the last axis."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, *, bias: bool = True, name: str = "linear") -> None:
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = Parameter(glorot(rng, in_dim, out_dim), name=f"{name}.weight")
        self.bias = Parameter(np.zeros(out_dim), name=f"{name}.bias") if bias else None

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_dim:
            raise DimensionError.mismatch("linear", x.shape, self.weight.shape)
        out = ops.matmul(x, self.weight)
        return out + self.bias if self.bias is not None else out


class LayerNorm(Module):
    def __init__(self, dim: int, *, name: str = "ln", eps: float = ops.LN_EPS) -> None:
        self.eps = eps
        self.gamma = Parameter(np.ones(dim), name=f"{name}.gamma")
        self.beta = Parameter(np.zeros(dim), name=f"{name}.beta")

    def forward(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gamma, self.beta, self.eps)


class RowFF(Module):
    """Row-wise two-layer perceptron ``d -> hidden -> d`` with ReLU in between."""

    def __init__(self, dim: int, rng: np.random.Generator, *, hidden: int | None = None, name: str = "rff") -> None:
        hidden = hidden or dim
        self.fc1 = Linear(dim, hidden, rng, name=f"{name}.fc1")
        self.fc2 = Linear(hidden, dim, rng, name=f"{name}.fc2")

    def forward(self, x: Tensor) -> Tensor:
        return self.fc2(ops.relu(self.fc1(x)))


class Dropout(Module):
    """Inverted dropout that draws its masks from the shared run generator."""

    def __init__(self, p: float, rng: np.random.Generator) -> None:
        self.p = p
        self.rng = rng

    def forward(self, x: Tensor) -> Tensor:
        return ops.dropout(x, self.p, self.rng, self.training)
