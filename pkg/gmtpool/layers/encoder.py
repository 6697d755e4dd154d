"""Stacked GCN encoder with optional jumping-knowledge concatenation."""

from __future__ import annotations

from typing import List, Optional

import numpy as np

from gmtpool.autodiff import ops
from gmtpool.autodiff.nn import Dropout, Linear, Module
from gmtpool.autodiff.tensor import Tensor, as_tensor
from gmtpool.errors import ParameterError
from gmtpool.graphs.graph import PropagationPlan
from gmtpool.layers.gcn import GcnLayer

JK_MODES = ("concat", "last")


class Encoder(Module):
    """``num_layers`` GCN layers, ReLU between them and none after the last.

    With ``jk="concat"`` every layer output is concatenated feature-wise and
    projected back to ``hidden`` by a linear layer.
    """

    def __init__(
        self,
        in_dim: int,
        hidden: int,
        rng: np.random.Generator,
        *,
        num_layers: int = 3,
        jk: str = "concat",
        bias: bool = True,
        dropout: float = 0.0,
        name: str = "encoder",
    ) -> None:
        if num_layers < 1:
            raise ParameterError(f"encoder needs at least one layer, got {num_layers}")
        if jk not in JK_MODES:
            raise ParameterError(f"unknown jumping-knowledge mode {jk!r}", data={"choices": list(JK_MODES)})
        self.jk = jk
        self.out_dim = hidden
        self.layers: List[GcnLayer] = [
            GcnLayer(
                in_dim if i == 0 else hidden,
                hidden,
                rng,
                bias=bias,
                activation="relu" if i < num_layers - 1 else None,
                name=f"{name}.gcn{i}",
            )
            for i in range(num_layers)
        ]
        self.dropout = Dropout(dropout, rng)
        self.project: Optional[Linear] = (
            Linear(num_layers * hidden, hidden, rng, name=f"{name}.jk") if jk == "concat" else None
        )

    def forward(self, x: Tensor, plan: PropagationPlan) -> Tensor:
        h = as_tensor(x)
        outputs: List[Tensor] = []
        for layer in self.layers:
            h = layer(h, plan)
            if layer.activation is not None:
                h = self.dropout(h)
            outputs.append(h)
        if self.project is None:
            return outputs[-1]
        return self.project(ops.concat(outputs, axis=-1))


class RowEncoder(Module):
    """Message-passing-free encoder: one shared linear map of every node row."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator, *, name: str = "row_encoder") -> None:
        self.out_dim = hidden
        self.linear = Linear(in_dim, hidden, rng, name=name)

    def forward(self, x: Tensor, plan: Optional[PropagationPlan] = None) -> Tensor:
        return self.linear(as_tensor(x))


def encode(enc: Module, x, edges, *, n: Optional[int] = None) -> Tensor:
    """Run *enc* on one graph given as features plus an undirected edge list."""
    x = as_tensor(x)
    n = x.shape[0] if n is None else n
    return enc(x, PropagationPlan.gcn(np.asarray(edges, dtype=np.int64).reshape(-1, 2), n))
