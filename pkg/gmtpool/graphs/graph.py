"""Graph, Dataset and disjoint-union batching.

Edges are stored once per undirected pair as an ``(E, 2)`` integer array;
message passing expands them to both directions (plus self-loops) on the fly
through :class:`PropagationPlan`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence

import numpy as np

from gmtpool.errors import BatchError, InvalidInputError


def canonical_edges(edges, n: int) -> np.ndarray:
    """Return ``(E, 2)`` int64 edges with ``i < j``, duplicates and self-loops removed, sorted."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.min() < 0 or arr.max() >= n:
        raise InvalidInputError(f"edge endpoint outside [0, {n})", data={"n": n})
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keep = lo != hi
    pairs = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0)
    return pairs.reshape(-1, 2)


@dataclass(frozen=True)
class PropagationPlan:
    """Directed edge list with symmetric GCN weights ``D^-1/2 (A + I) D^-1/2``."""

    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    n: int

    @classmethod
    def gcn(cls, edges: np.ndarray, n: int, *, self_loops: bool = True) -> "PropagationPlan":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        loops = np.arange(n, dtype=np.int64) if self_loops else np.zeros(0, dtype=np.int64)
        src = np.concatenate([edges[:, 0], edges[:, 1], loops])
        dst = np.concatenate([edges[:, 1], edges[:, 0], loops])
        deg = np.bincount(dst, minlength=n).astype(np.float64)
        inv_sqrt = np.zeros(n)
        np.divide(1.0, np.sqrt(deg), out=inv_sqrt, where=deg > 0)
        return cls(src=src, dst=dst, weight=inv_sqrt[src] * inv_sqrt[dst], n=n)

    @classmethod
    def identity(cls, n: int) -> "PropagationPlan":
        idx = np.arange(n, dtype=np.int64)
        return cls(src=idx, dst=idx, weight=np.ones(n), n=n)

    @property
    def is_identity(self) -> bool:
        return self.src.size == self.n and bool(np.all(self.src == self.dst)) and bool(np.all(self.weight == 1.0))

    def dense(self) -> np.ndarray:
        """Materialise the n×n propagation matrix (tests and tiny graphs only)."""
        mat = np.zeros((self.n, self.n))
        np.add.at(mat, (self.dst, self.src), self.weight)
        return mat


@dataclass
class Graph:
    """One graph: node features X, undirected edge list, optional label/coords.

    Edges are canonicalised on construction, so reversed pairs, repeats and
    self-loops passed in are dropped silently.
    """

    node_features: np.ndarray
    edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    label: Optional[int] = None
    coords: Optional[np.ndarray] = None
    node_labels: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.node_features = np.asarray(self.node_features, dtype=np.float64)
        if self.node_features.ndim != 2:
            raise InvalidInputError(f"node_features must be 2-D, got shape {self.node_features.shape}")
        # stored edges are always canonical: i < j, no duplicates, no self-loops
        self.edges = canonical_edges(self.edges, self.n)
        if self.coords is not None:
            self.coords = np.asarray(self.coords, dtype=np.float64)
            if self.coords.shape != (self.n, 2):
                raise InvalidInputError(f"coords must be ({self.n}, 2), got {self.coords.shape}")

    @property
    def n(self) -> int:
        return int(self.node_features.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.node_features.shape[1])

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.reshape(-1), minlength=self.n)

    def dense_adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n))
        adj[self.edges[:, 0], self.edges[:, 1]] = 1.0
        adj[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return adj

    def permute(self, perm: Sequence[int]) -> "Graph":
        """Relabel nodes so that new node ``i`` is old node ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(perm.size)
        return Graph(
            node_features=self.node_features[perm],
            edges=inverse[self.edges] if self.edges.size else self.edges,
            label=self.label,
            coords=None if self.coords is None else self.coords[perm],
            node_labels=None if self.node_labels is None else self.node_labels[perm],
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        same_opt = all(
            (a is None and b is None) or (a is not None and b is not None and np.array_equal(a, b))
            for a, b in ((self.coords, other.coords), (self.node_labels, other.node_labels))
        )
        return (
            self.label == other.label
            and np.array_equal(self.node_features, other.node_features)
            and np.array_equal(self.edges, other.edges)
            and same_opt
        )


@dataclass
class Dataset:
    """A named collection of graphs sharing one feature dimensionality.

    ``label_values`` / ``node_label_values`` map the 0-based labels back to the
    raw integers of the source files (``None``: labels are already raw).
    """

    graphs: List[Graph]
    num_classes: int
    num_features: int
    name: str = "dataset"
    feature_source: str = "node_labels"
    label_values: Optional[np.ndarray] = None
    node_label_values: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        for i, g in enumerate(self.graphs):
            if g.num_features != self.num_features:
                raise InvalidInputError(f"graph {i} has {g.num_features} features, dataset expects {self.num_features}")
            if g.label is not None and not 0 <= g.label < self.num_classes:
                raise InvalidInputError(f"graph {i} label {g.label} outside [0, {self.num_classes})")

    def __len__(self) -> int:
        return len(self.graphs)

    def __getitem__(self, index: int) -> Graph:
        return self.graphs[index]

    @property
    def labels(self) -> np.ndarray:
        return np.array([-1 if g.label is None else g.label for g in self.graphs], dtype=np.int64)

    @property
    def max_nodes(self) -> int:
        return max((g.n for g in self.graphs), default=0)

    def subset(self, indices: Sequence[int]) -> List[Graph]:
        return [self.graphs[int(i)] for i in indices]

    def with_degree_features(self, cap: int) -> "Dataset":
        """One-hot node degree features, degrees above *cap* clamped to *cap*."""
        graphs = [
            Graph(
                node_features=np.eye(cap + 1)[np.minimum(g.degrees(), cap)],
                edges=g.edges,
                label=g.label,
                coords=g.coords,
                node_labels=g.node_labels,
            )
            for g in self.graphs
        ]
        return Dataset(
            graphs,
            self.num_classes,
            cap + 1,
            self.name,
            feature_source="degree",
            label_values=self.label_values,
            node_label_values=self.node_label_values,
        )


# ---------------------------------------------------------------------------
# Batching
# ---------------------------------------------------------------------------


@dataclass
class GraphBatch:
    """Disjoint union of graphs with offset-shifted edges and per-node graph ids."""

    node_features: np.ndarray
    edges: np.ndarray
    graph_id: np.ndarray
    counts: np.ndarray
    labels: Optional[np.ndarray] = None
    self_loops: bool = True

    @property
    def num_graphs(self) -> int:
        return int(self.counts.shape[0])

    @property
    def num_nodes(self) -> int:
        return int(self.node_features.shape[0])

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.counts)[:-1]]).astype(np.int64)

    @cached_property
    def positions(self) -> np.ndarray:
        """Index of every node inside its own graph."""
        return np.arange(self.num_nodes, dtype=np.int64) - self.offsets[self.graph_id]

    @property
    def max_nodes(self) -> int:
        return int(self.counts.max()) if self.counts.size else 0

    @cached_property
    def mask(self) -> np.ndarray:
        """``(B, n_max)`` boolean mask of real (non-padding) node slots."""
        return np.arange(self.max_nodes)[None, :] < self.counts[:, None]

    @cached_property
    def plan(self) -> PropagationPlan:
        """Cached per-batch GCN normalisation."""
        return PropagationPlan.gcn(self.edges, self.num_nodes, self_loops=self.self_loops)

    @cached_property
    def identity_plan(self) -> PropagationPlan:
        return PropagationPlan.identity(self.num_nodes)

    def dense_adjacency(self) -> np.ndarray:
        """``(B, n_max, n_max)`` zero-padded raw adjacency blocks."""
        adj = np.zeros((self.num_graphs, self.max_nodes, self.max_nodes))
        if self.edges.size:
            g = self.graph_id[self.edges[:, 0]]
            i = self.positions[self.edges[:, 0]]
            j = self.positions[self.edges[:, 1]]
            adj[g, i, j] = 1.0
            adj[g, j, i] = 1.0
        return adj

    @classmethod
    def uniform(cls, num_graphs: int, size: int, dim: int = 0) -> "GraphBatch":
        """Edge-free layout of *num_graphs* graphs with *size* nodes each."""
        counts = np.full(num_graphs, size, dtype=np.int64)
        return cls(
            node_features=np.zeros((num_graphs * size, dim)),
            edges=np.zeros((0, 2), dtype=np.int64),
            graph_id=np.repeat(np.arange(num_graphs, dtype=np.int64), size),
            counts=counts,
        )


def make_batch(graphs: Sequence[Graph]) -> GraphBatch:
    """Stack *graphs* into one block-diagonal batch."""
    if not graphs:
        raise BatchError("cannot batch an empty list of graphs")
    dims = {g.num_features for g in graphs}
    if len(dims) != 1:
        raise BatchError(f"mixed feature dimensions in batch: {sorted(dims)}", data={"dims": sorted(dims)})
    counts = np.array([g.n for g in graphs], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    edges = [g.edges + off for g, off in zip(graphs, offsets) if g.num_edges]
    labels = None
    if all(g.label is not None for g in graphs):
        labels = np.array([g.label for g in graphs], dtype=np.int64)
    return GraphBatch(
        node_features=np.concatenate([g.node_features for g in graphs], axis=0),
        edges=np.concatenate(edges, axis=0) if edges else np.zeros((0, 2), dtype=np.int64),
        graph_id=np.repeat(np.arange(len(graphs), dtype=np.int64), counts),
        counts=counts,
        labels=labels,
    )


def split_batch(batch: GraphBatch) -> List[Graph]:
    """Inverse of :func:`make_batch` (labels and structure only)."""
    graphs: List[Graph] = []
    edge_owner = batch.graph_id[batch.edges[:, 0]] if batch.edges.size else np.zeros(0, dtype=np.int64)
    for b, (off, cnt) in enumerate(zip(batch.offsets, batch.counts)):
        graphs.append(
            Graph(
                node_features=batch.node_features[off : off + cnt],
                edges=batch.edges[edge_owner == b] - off,
                label=None if batch.labels is None else int(batch.labels[b]),
            )
        )
    return graphs
