"""Scaled dot-product attention and (graph) multi-head attention.

Keys and values arrive as a node block ``(N, d)`` plus the :class:`GraphBatch`
layout that owns it.  They are projected on the block, then scattered into a
zero-padded ``(B, n_max, ·)`` array; a key mask keeps attention from crossing
graph boundaries or landing on padding.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from gmtpool.autodiff import ops
from gmtpool.autodiff.nn import Dropout, Linear, Module
from gmtpool.autodiff.tensor import Tensor, as_tensor
from gmtpool.errors import DimensionError, InvalidInputError, ParameterError
from gmtpool.graphs.graph import GraphBatch, PropagationPlan
from gmtpool.layers.gcn import GcnLayer

AXES = {"key": -1, "query": -2}


class AttentionOutput(NamedTuple):
    output: Tensor
    weights: Tensor
    scores: Tensor


def attention(
    q,
    k,
    v,
    *,
    mask: Optional[np.ndarray] = None,
    axis: str = "key",
    scale: bool = True,
    dropout: Optional[Dropout] = None,
) -> AttentionOutput:
    """``w(Q Kᵀ / √d_k) V`` with ``w`` a softmax over keys (default) or over queries.

    *mask* is a boolean array broadcastable to the score shape ``(..., n_q, n)``
    marking valid keys.
    """
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    if axis not in AXES:
        raise ParameterError(f"unknown softmax axis {axis!r}", data={"choices": list(AXES)})
    if q.shape[-1] != k.shape[-1] or k.shape[-2] != v.shape[-2]:
        raise DimensionError.mismatch("attention", q.shape, k.shape, v.shape)
    if k.shape[-2] == 0:
        raise InvalidInputError("attention over an empty key set")
    if mask is not None and not np.all(np.asarray(mask).any(axis=-1)):
        raise InvalidInputError("attention over an empty key set")

    scores = ops.matmul(q, k.T)
    if scale:
        scores = scores * (1.0 / np.sqrt(q.shape[-1]))
    weights = ops.softmax(scores, axis=AXES[axis], mask=mask)
    attended = weights if dropout is None else dropout(weights)
    return AttentionOutput(ops.matmul(attended, v), weights, scores)


def pad_block(x: Tensor, layout: GraphBatch) -> Tensor:
    """``(N, f)`` node block → ``(B, n_max, f)`` zero-padded per-graph array."""
    counts = layout.counts
    if counts.size and np.all(counts == counts[0]):
        return ops.reshape(x, (layout.num_graphs, int(counts[0]), x.shape[-1]))
    return ops.pad_segments(x, layout.graph_id, layout.positions, layout.num_graphs, layout.max_nodes)


def unpad_block(x: Tensor, layout: GraphBatch) -> Tensor:
    """Inverse of :func:`pad_block`."""
    return ops.getitem(x, (layout.graph_id, layout.positions))


class MultiHeadAttention(Module):
    """``[O_1 … O_h] Wᴼ`` with ``O_i = Att(Q Wᵢ^Q, K Wᵢ^K, V Wᵢ^V)``.

    Every head works at the full width ``dim``; the per-head projections are
    stored side by side as one ``dim × h·dim`` matrix.  With ``graph_kv`` the
    key and value projections are linear GCN layers over the graph structure
    (graph multi-head attention).
    """

    def __init__(
        self,
        dim: int,
        heads: int,
        rng: np.random.Generator,
        *,
        graph_kv: bool = False,
        scale: bool = True,
        dropout: float = 0.0,
        name: str = "mha",
    ) -> None:
        if heads < 1:
            raise ParameterError(f"need at least one head, got {heads}", data={"heads": heads})
        self.dim = dim
        self.heads = heads
        self.scale = scale
        self.graph_kv = graph_kv
        self.q_proj = Linear(dim, heads * dim, rng, bias=False, name=f"{name}.q")
        if graph_kv:
            self.k_proj = GcnLayer(dim, heads * dim, rng, bias=False, activation=None, name=f"{name}.k_gcn")
            self.v_proj = GcnLayer(dim, heads * dim, rng, bias=False, activation=None, name=f"{name}.v_gcn")
        else:
            self.k_proj = Linear(dim, heads * dim, rng, bias=False, name=f"{name}.k")
            self.v_proj = Linear(dim, heads * dim, rng, bias=False, name=f"{name}.v")
        self.o_proj = Linear(heads * dim, dim, rng, bias=False, name=f"{name}.o")
        self.dropout = Dropout(dropout, rng)

    def _split_heads(self, x: Tensor) -> Tensor:
        lead = x.shape[:-1]
        return ops.transpose(ops.reshape(x, lead + (self.heads, self.dim)), (0, 2, 1, 3))

    def _merge_heads(self, x: Tensor) -> Tensor:
        b, _, n, _ = x.shape
        return ops.reshape(ops.transpose(x, (0, 2, 1, 3)), (b, n, self.heads * self.dim))

    def forward(
        self,
        query: Tensor,
        nodes: Tensor,
        layout: GraphBatch,
        plan: Optional[PropagationPlan] = None,
        *,
        axis: str = "key",
    ) -> AttentionOutput:
        """Attend from ``query`` ``(B or 1, n_q, dim)`` to the node block of *layout*."""
        if query.shape[-1] != self.dim or nodes.shape[-1] != self.dim:
            raise ParameterError(
                f"attention width {self.dim} does not match query {query.shape} / nodes {nodes.shape}",
                data={"dim": self.dim},
            )
        if self.graph_kv:
            plan = plan if plan is not None else layout.plan
            keys, values = self.k_proj(nodes, plan), self.v_proj(nodes, plan)
        else:
            keys, values = self.k_proj(nodes), self.v_proj(nodes)
        k = self._split_heads(pad_block(keys, layout))
        v = self._split_heads(pad_block(values, layout))
        q = self._split_heads(self.q_proj(query))
        mask = layout.mask[:, None, None, :]
        att = attention(q, k, v, mask=mask, axis=axis, scale=self.scale, dropout=self.dropout)
        return AttentionOutput(self.o_proj(self._merge_heads(att.output)), att.weights, att.scores)


def multi_head(query, keys_values, params: MultiHeadAttention) -> Tensor:
    """Single-graph MH/GMH: ``query`` is ``(n_q, d)``, ``keys_values`` is ``(n, d)``."""
    nodes = as_tensor(keys_values)
    layout = GraphBatch.uniform(1, nodes.shape[0], nodes.shape[1])
    q = ops.reshape(as_tensor(query), (1,) + as_tensor(query).shape)
    out = params(q, nodes, layout, PropagationPlan.identity(nodes.shape[0])).output
    return ops.reshape(out, out.shape[1:])


def graph_multi_head(query, h, edges, params: MultiHeadAttention, *, identity_adjacency: bool = False) -> Tensor:
    """Single-graph GMH whose keys and values see the graph given by *edges*."""
    nodes = as_tensor(h)
    n = nodes.shape[0]
    layout = GraphBatch.uniform(1, n, nodes.shape[1])
    plan = PropagationPlan.identity(n) if identity_adjacency else PropagationPlan.gcn(np.asarray(edges).reshape(-1, 2), n)
    q = ops.reshape(as_tensor(query), (1,) + as_tensor(query).shape)
    out = params(q, nodes, layout, plan).output
    return ops.reshape(out, out.shape[1:])
