"""Baseline READOUTs: sum / mean, top-k node drop and soft node clustering."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from gmtpool.autodiff import ops
from gmtpool.autodiff.nn import Linear, Module, glorot
from gmtpool.autodiff.tensor import Parameter, Tensor, as_tensor
from gmtpool.errors import ParameterError
from gmtpool.graphs.graph import GraphBatch, PropagationPlan
from gmtpool.layers.gcn import GcnLayer
from gmtpool.pooling.attention import pad_block


def sum_pool(h, graph_ids: np.ndarray, num_graphs: int | None = None) -> Tensor:
    graph_ids = np.asarray(graph_ids, dtype=np.int64)
    num_graphs = int(graph_ids.max()) + 1 if num_graphs is None else num_graphs
    return ops.segment_sum(as_tensor(h), graph_ids, num_graphs)


def mean_pool(h, graph_ids: np.ndarray, num_graphs: int | None = None) -> Tensor:
    graph_ids = np.asarray(graph_ids, dtype=np.int64)
    num_graphs = int(graph_ids.max()) + 1 if num_graphs is None else num_graphs
    counts = np.bincount(graph_ids, minlength=num_graphs).astype(np.float64)
    return sum_pool(h, graph_ids, num_graphs) / np.maximum(counts, 1.0)[:, None]


# ---------------------------------------------------------------------------
# Node drop
# ---------------------------------------------------------------------------


def keep_count(ratio: float, n: int) -> int:
    """``ceil(ratio * n)`` clamped to ``[1, n]``; immune to ``2/3 * 3`` style round-off."""
    if not 0.0 < ratio <= 1.0:
        raise ParameterError(f"pooling ratio must lie in (0, 1], got {ratio}", data={"ratio": ratio})
    return max(1, min(n, math.ceil(ratio * n - 1e-9)))


def select_topk(scores: np.ndarray, graph_id: np.ndarray, counts: np.ndarray, ratio: float) -> np.ndarray:
    """Global indices of the kept nodes, ascending; ties go to the lower index."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    order = np.lexsort((np.arange(scores.size), -scores, graph_id))
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    rank = np.arange(scores.size) - starts[graph_id[order]]
    quota = np.array([keep_count(ratio, int(c)) if c else 0 for c in counts], dtype=np.int64)
    return np.sort(order[rank < quota[graph_id[order]]])


class TopKResult(NamedTuple):
    nodes: Tensor
    layout: GraphBatch
    kept: np.ndarray
    scores: Tensor


def induced_batch(layout: GraphBatch, kept: np.ndarray, features: np.ndarray) -> GraphBatch:
    """Sub-batch on the *kept* nodes with every edge whose endpoints both survive."""
    remap = np.full(layout.num_nodes, -1, dtype=np.int64)
    remap[kept] = np.arange(kept.size)
    edges = layout.edges
    if edges.size:
        both = (remap[edges[:, 0]] >= 0) & (remap[edges[:, 1]] >= 0)
        edges = remap[edges[both]]
    graph_id = layout.graph_id[kept]
    return GraphBatch(
        node_features=features,
        edges=edges.reshape(-1, 2),
        graph_id=graph_id,
        counts=np.bincount(graph_id, minlength=layout.num_graphs).astype(np.int64),
        labels=layout.labels,
    )


def _topk_select(h: Tensor, layout: GraphBatch, score: Parameter, ratio: float) -> TopKResult:
    norm = ops.sqrt(ops.sum(score * score))
    y = ops.matmul(h, ops.reshape(score, (-1, 1))) / norm
    kept = select_topk(y.data, layout.graph_id, layout.counts, ratio)
    nodes = ops.getitem(h, kept) * ops.tanh(ops.getitem(y, kept))
    return TopKResult(nodes, induced_batch(layout, kept, nodes.data), kept, y)


class TopKPool(Module):
    """Score ``y = H p / ‖p‖``; keep the top ``ceil(ratio·n)`` nodes per graph gated by ``tanh(y)``."""

    def __init__(self, dim: int, ratio: float, rng: np.random.Generator, *, name: str = "topk") -> None:
        keep_count(ratio, 1)
        self.ratio = ratio
        self.out_dim = dim
        self.score = Parameter(glorot(rng, dim, 1)[:, 0], name=f"{name}.p")

    def select(self, h: Tensor, layout: GraphBatch) -> TopKResult:
        return _topk_select(h, layout, self.score, self.ratio)

    def forward(self, h: Tensor, layout: GraphBatch) -> Tensor:
        res = self.select(h, layout)
        return mean_pool(res.nodes, res.layout.graph_id, layout.num_graphs)


def topk_pool(h, edges, score: Parameter, ratio: float) -> tuple[Tensor, np.ndarray, np.ndarray]:
    """Single-graph node drop: ``(H_kept, edges_kept, kept_indices)``."""
    h = as_tensor(h)
    layout = GraphBatch.uniform(1, h.shape[0], h.shape[1])
    layout.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    res = _topk_select(h, layout, score, ratio)
    return res.nodes, res.layout.edges, res.kept


# ---------------------------------------------------------------------------
# Node clustering
# ---------------------------------------------------------------------------


def coarsen_adjacency(c: np.ndarray, edges, n: int | None = None) -> np.ndarray:
    """Dense ``Cᵀ A C`` from an undirected edge list, never forming ``A``."""
    c = np.asarray(c, dtype=np.float64)
    n = c.shape[0] if n is None else n
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    ac = np.zeros_like(c)
    if edges.size:
        np.add.at(ac, edges[:, 0], c[edges[:, 1]])
        np.add.at(ac, edges[:, 1], c[edges[:, 0]])
    return c.T @ ac


def adjacency_product(c: Tensor, edges: np.ndarray, n: int) -> Tensor:
    """Differentiable ``A C`` for unit-weight undirected *edges*."""
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    return ops.propagate(c, src, dst, np.ones(src.size), n)


def normalise_dense(adj: Tensor) -> Tensor:
    """``D̃^-1/2 (A + I) D̃^-1/2`` for a batch of dense ``(B, k, k)`` adjacencies."""
    k = adj.shape[-1]
    looped = adj + np.eye(k)
    inv_sqrt = 1.0 / ops.sqrt(ops.sum(looped, axis=-1, keepdims=True))
    return looped * inv_sqrt * ops.swapaxes(inv_sqrt, -1, -2)


class ClusterOutput(NamedTuple):
    pooled: Tensor
    adjacency: Tensor
    assignment: Tensor


def _cluster(h: Tensor, layout: GraphBatch, assign: GcnLayer, plan: PropagationPlan | None = None) -> ClusterOutput:
    logits = assign(h, plan if plan is not None else layout.plan)
    c = pad_block(ops.softmax(logits, axis=-1), layout)
    ct = ops.swapaxes(c, -1, -2)
    pooled = ops.matmul(ct, pad_block(h, layout))
    adjacency = ops.matmul(ct, ops.matmul(layout.dense_adjacency(), c))
    return ClusterOutput(pooled, adjacency, c)


class ClusterPool(Module):
    """``C = softmax(GCN(H, A))``, ``H' = Cᵀ H``, ``A' = Cᵀ A C``.

    The coarsening multiplies by the dense padded ``(B, n, n)`` adjacency.
    As a READOUT it runs one dense GCN on the coarsened graph and averages
    the ``k`` cluster vectors.
    """

    def __init__(self, dim: int, k: int, rng: np.random.Generator, *, name: str = "cluster") -> None:
        if k < 1:
            raise ParameterError(f"cluster count must be >= 1, got {k}", data={"k": k})
        self.k = k
        self.out_dim = dim
        self.assign = GcnLayer(dim, k, rng, activation=None, name=f"{name}.assign")
        self.post = Linear(dim, dim, rng, name=f"{name}.post")

    def cluster(self, h: Tensor, layout: GraphBatch, plan: PropagationPlan | None = None) -> ClusterOutput:
        return _cluster(h, layout, self.assign, plan)

    def forward(self, h: Tensor, layout: GraphBatch) -> Tensor:
        out = self.cluster(h, layout)
        mixed = ops.relu(self.post(ops.matmul(normalise_dense(out.adjacency), out.pooled)))
        return ops.mean(mixed, axis=1)


def cluster_pool(h, edges, assign: GcnLayer) -> tuple[Tensor, Tensor]:
    """Single-graph node clustering: ``(Cᵀ H, Cᵀ A C)``."""
    h = as_tensor(h)
    layout = GraphBatch.uniform(1, h.shape[0], h.shape[1])
    layout.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    out = _cluster(h, layout, assign)
    k = assign.out_dim
    return ops.reshape(out.pooled, (k, h.shape[1])), ops.reshape(out.adjacency, (k, k))
