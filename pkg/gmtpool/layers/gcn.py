"""Graph convolution ``H' = act(Â H W + b)`` computed by sparse per-edge scatter."""

from __future__ import annotations

from typing import Optional

import numpy as np

from gmtpool.autodiff import ops
from gmtpool.autodiff.nn import Module, glorot
from gmtpool.autodiff.tensor import Parameter, Tensor, as_tensor
from gmtpool.errors import DimensionError, ParameterError
from gmtpool.graphs.graph import PropagationPlan

ACTIVATIONS = ("relu", None)


class GcnLayer(Module):
    """One GCN layer; ``Â = D̃^-1/2 (A + I) D̃^-1/2`` comes from a :class:`PropagationPlan`."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        *,
        bias: bool = True,
        activation: Optional[str] = "relu",
        name: str = "gcn",
    ) -> None:
        if activation not in ACTIVATIONS:
            raise ParameterError(f"unknown activation {activation!r}", data={"choices": ["relu", None]})
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.activation = activation
        self.weight = Parameter(glorot(rng, in_dim, out_dim), name=f"{name}.weight")
        self.bias = Parameter(np.zeros(out_dim), name=f"{name}.bias") if bias else None

    def forward(self, h: Tensor, plan: PropagationPlan) -> Tensor:
        h = as_tensor(h)
        if h.ndim != 2 or h.shape[1] != self.in_dim or h.shape[0] != plan.n:
            raise DimensionError.mismatch("gcn", h.shape, (plan.n, self.in_dim))
        # project first when it shrinks the width the scatter has to move
        if self.in_dim > self.out_dim:
            out = _spread(ops.matmul(h, self.weight), plan)
        else:
            out = ops.matmul(_spread(h, plan), self.weight)
        if self.bias is not None:
            out = out + self.bias
        return ops.relu(out) if self.activation == "relu" else out


def _spread(h: Tensor, plan: PropagationPlan) -> Tensor:
    if plan.is_identity:
        return h
    return ops.propagate(h, plan.src, plan.dst, plan.weight, plan.n)


def gcn_forward(layer: GcnLayer, h, edges, n: int, *, self_loops: bool = True) -> Tensor:
    """Apply *layer* to a single graph given as an undirected edge list."""
    return layer(as_tensor(h), PropagationPlan.gcn(np.asarray(edges, dtype=np.int64).reshape(-1, 2), n, self_loops=self_loops))
