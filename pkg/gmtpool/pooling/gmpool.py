"""Seeded multiset pooling, self-attention and the composed GMT readout."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from gmtpool.autodiff import ops
from gmtpool.autodiff.nn import LayerNorm, Module, RowFF
from gmtpool.autodiff.tensor import Parameter, Tensor, as_tensor
from gmtpool.errors import InvalidInputError, ParameterError
from gmtpool.graphs.graph import GraphBatch, PropagationPlan
from gmtpool.pooling.attention import AttentionOutput, MultiHeadAttention

ASSIGNMENT_MODES = ("query", "key")


# ---------------------------------------------------------------------------
# Assignment matrices
# ---------------------------------------------------------------------------


@dataclass
class AssignmentMatrix:
    """Soft ``n × k`` node-to-cluster memberships of one graph."""

    values: np.ndarray
    source: str = "gmpool"
    mode: str = "query"

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def k(self) -> int:
        return int(self.values.shape[1])

    def is_valid(self, tol: float = 1e-6) -> bool:
        """Rows sum to one and every entry lies in ``[0, 1]``."""
        v = self.values
        return bool(
            np.all(v >= -tol) and np.all(v <= 1.0 + tol) and np.allclose(v.sum(axis=1), 1.0, atol=tol, rtol=0.0)
        )

    def hard_labels(self) -> np.ndarray:
        return np.argmax(self.values, axis=1)


def key_weights(att: AttentionOutput) -> Tensor:
    """Head-averaged key-axis attention weights, transposed to ``(B, n_max, k)``."""
    return ops.swapaxes(ops.mean(att.weights, axis=1), -1, -2)


def assignment_tensor(att: AttentionOutput, layout: GraphBatch, mode: str = "query") -> Tensor:
    """Differentiable padded assignment ``(B, n_max, k)``; padded rows are zero.

    ``query`` normalises the scores over the seeds so each node distributes
    unit mass over the k clusters.  ``key`` reuses the forward (key-axis)
    weights and renormalises each node row.

    For a one-node graph every seed puts all its key-axis weight on that node,
    so :func:`key_weights` gives an all-ones ``1 × k`` row.  ``key`` mode
    divides it by ``k`` to a uniform ``1/k`` row: every assignment this
    function returns has rows summing to one, which unpooling ``C · X_pool``
    and the ``C Aᵖ Cᵀ`` reconstruction rely on.
    """
    if mode not in ASSIGNMENT_MODES:
        raise ParameterError(f"unknown assignment mode {mode!r}", data={"choices": list(ASSIGNMENT_MODES)})
    if mode == "query":
        mask = layout.mask[:, None, None, :]
        per_head = ops.softmax(att.scores, axis=-2, mask=mask)
        return ops.swapaxes(ops.mean(per_head, axis=1), -1, -2)
    raw = key_weights(att)
    rows = ops.sum(raw, axis=-1, keepdims=True)
    return raw / (rows + Tensor((rows.data == 0.0).astype(np.float64)))


def split_assignment(c: Tensor, layout: GraphBatch, *, source: str = "gmpool", mode: str = "query") -> List[AssignmentMatrix]:
    data = c.data if isinstance(c, Tensor) else np.asarray(c)
    return [
        AssignmentMatrix(values=data[b, : int(layout.counts[b])].copy(), source=source, mode=mode)
        for b in range(layout.num_graphs)
    ]


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------


class PoolOutput(NamedTuple):
    pooled: Tensor
    attention: AttentionOutput


class GMPool(Module):
    """``LN(Z + rFF(Z))`` with ``Z = LN(S + GMH(S, H, A))`` for a learned seed matrix ``S``."""

    def __init__(
        self,
        dim: int,
        k: int,
        heads: int,
        rng: np.random.Generator,
        *,
        graph_kv: bool = True,
        scale: bool = True,
        dropout: float = 0.0,
        rff_hidden: Optional[int] = None,
        name: str = "gmpool",
    ) -> None:
        if k < 1:
            raise ParameterError(f"seed count must be >= 1, got {k}", data={"k": k})
        self.k = k
        self.dim = dim
        self.seeds = Parameter(rng.normal(0.0, 1.0 / np.sqrt(dim), size=(k, dim)), name=f"{name}.seeds")
        self.attn = MultiHeadAttention(dim, heads, rng, graph_kv=graph_kv, scale=scale, dropout=dropout, name=f"{name}.mha")
        self.ln0 = LayerNorm(dim, name=f"{name}.ln0")
        self.rff = RowFF(dim, rng, hidden=rff_hidden, name=f"{name}.rff")
        self.ln1 = LayerNorm(dim, name=f"{name}.ln1")

    def forward(self, nodes: Tensor, layout: GraphBatch, plan: Optional[PropagationPlan] = None, *, axis: str = "key") -> PoolOutput:
        seeds = ops.reshape(self.seeds, (1, self.k, self.dim))
        att = self.attn(seeds, nodes, layout, plan, axis=axis)
        z = self.ln0(seeds + att.output)
        return PoolOutput(self.ln1(z + self.rff(z)), att)


class SelfAttention(Module):
    """``LN(Z + rFF(Z))`` with ``Z = LN(H + MH(H, H, H))`` over a dense ``(B, k, d)`` set."""

    def __init__(
        self,
        dim: int,
        heads: int,
        rng: np.random.Generator,
        *,
        scale: bool = True,
        dropout: float = 0.0,
        rff_hidden: Optional[int] = None,
        name: str = "selfatt",
    ) -> None:
        self.attn = MultiHeadAttention(dim, heads, rng, graph_kv=False, scale=scale, dropout=dropout, name=f"{name}.mha")
        self.ln0 = LayerNorm(dim, name=f"{name}.ln0")
        self.rff = RowFF(dim, rng, hidden=rff_hidden, name=f"{name}.rff")
        self.ln1 = LayerNorm(dim, name=f"{name}.ln1")

    def forward(self, h: Tensor) -> Tensor:
        b, k, d = h.shape
        layout = GraphBatch.uniform(b, k)
        att = self.attn(h, ops.reshape(h, (b * k, d)), layout)
        z = self.ln0(h + att.output)
        return self.ln1(z + self.rff(z))


class GmtOutput(NamedTuple):
    graph: Tensor
    condensed: PoolOutput


class GmtPooler(Module):
    """``GMPool_1(SelfAtt(GMPool_k(H, A)), I)``: one ``dim`` vector per graph.

    ``use_gmh=False`` swaps the structure-aware key/value GCNs of the first
    pool for plain linear maps; ``use_selfatt=False`` drops the middle block.
    The second pool always runs on the identity adjacency.
    """

    def __init__(
        self,
        dim: int,
        k: int,
        heads: int,
        rng: np.random.Generator,
        *,
        use_gmh: bool = True,
        use_selfatt: bool = True,
        scale: bool = True,
        dropout: float = 0.0,
        name: str = "gmt",
    ) -> None:
        self.out_dim = dim
        self.k = k
        self.pool_k = GMPool(dim, k, heads, rng, graph_kv=use_gmh, scale=scale, dropout=dropout, name=f"{name}.pool_k")
        self.self_att: Optional[SelfAttention] = (
            SelfAttention(dim, heads, rng, scale=scale, dropout=dropout, name=f"{name}.selfatt") if use_selfatt else None
        )
        self.pool_1 = GMPool(dim, 1, heads, rng, graph_kv=False, scale=scale, dropout=dropout, name=f"{name}.pool_1")

    def pool(self, h: Tensor, layout: GraphBatch, plan: Optional[PropagationPlan] = None) -> GmtOutput:
        first = self.pool_k(h, layout, plan)
        condensed = first.pooled
        if self.self_att is not None:
            condensed = self.self_att(condensed)
        b, k, d = condensed.shape
        final = self.pool_1(ops.reshape(condensed, (b * k, d)), GraphBatch.uniform(b, k))
        return GmtOutput(ops.reshape(final.pooled, (b, d)), first)

    def forward(self, h: Tensor, layout: GraphBatch) -> Tensor:
        return self.pool(h, layout).graph


# ---------------------------------------------------------------------------
# Single-graph helpers
# ---------------------------------------------------------------------------


def _single(h, edges) -> tuple[Tensor, GraphBatch]:
    h = as_tensor(h)
    n = h.shape[0]
    if n == 0:
        raise InvalidInputError("cannot pool an empty graph")
    layout = GraphBatch.uniform(1, n, h.shape[1])
    layout.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return h, layout


def gmpool(h, edges, block: GMPool, *, mode: str = "query") -> tuple[Tensor, AssignmentMatrix]:
    """Pool one graph to ``k × d`` and extract its assignment matrix."""
    h, layout = _single(h, edges)
    out = block(h, layout)
    c = assignment_tensor(out.attention, layout, mode)
    pooled = ops.reshape(out.pooled, (block.k, block.dim))
    return pooled, split_assignment(c, layout, mode=mode)[0]


def self_att(h, params: SelfAttention) -> Tensor:
    h = as_tensor(h)
    k, d = h.shape
    return ops.reshape(params(ops.reshape(h, (1, k, d))), (k, d))


def gmt_readout(pooler: GmtPooler, h, edges) -> Tensor:
    """Graph representation ``(d,)`` of one graph."""
    h, layout = _single(h, edges)
    return ops.reshape(pooler(h, layout), (pooler.out_dim,))
