"""Classification and reconstruction networks assembled from the layer/pooling blocks."""

from __future__ import annotations

from typing import List, NamedTuple, Optional

import numpy as np

from gmtpool.autodiff import ops
from gmtpool.autodiff.nn import Linear, Module
from gmtpool.autodiff.tensor import Tensor
from gmtpool.config import RECONSTRUCT_POOLS, RunConfig
from gmtpool.errors import ConfigError
from gmtpool.graphs.graph import Graph, GraphBatch, make_batch
from gmtpool.layers.encoder import Encoder, RowEncoder
from gmtpool.layers.gcn import GcnLayer
from gmtpool.pooling.baselines import ClusterPool, TopKPool, adjacency_product
from gmtpool.pooling.gmpool import GMPool, assignment_tensor
from gmtpool.pooling.registry import ReadoutSpec, build_readout


class ClassifierModel(Module):
    """Encoder → READOUT → linear head producing ``num_classes`` logits per graph."""

    def __init__(self, in_dim: int, num_classes: int, config: RunConfig, k: int, rng: np.random.Generator) -> None:
        if config.message_passing:
            self.encoder: Module = Encoder(
                in_dim,
                config.hidden,
                rng,
                num_layers=config.num_layers,
                jk=config.jk,
                bias=config.gcn_bias,
                dropout=config.dropout,
            )
        else:
            self.encoder = RowEncoder(in_dim, config.hidden, rng)
        spec = ReadoutSpec(
            rng=rng,
            k=k,
            ratio=config.ratio,
            heads=config.heads,
            scale=config.scale_attention,
            dropout=config.attention_dropout,
        )
        self.readout = build_readout(config.pool, config.hidden, spec)
        self.head = Linear(self.readout.out_dim, num_classes, rng, name="head")
        self.num_classes = num_classes

    def embed(self, batch: GraphBatch) -> Tensor:
        h = self.encoder(Tensor(batch.node_features), batch.plan)
        return self.readout(h, batch)

    def forward(self, batch: GraphBatch) -> Tensor:
        return self.head(self.embed(batch))


class ReconOutput(NamedTuple):
    features: Tensor
    assignment: Optional[Tensor]
    kept: Optional[np.ndarray]


class ReconModel(Module):
    """Two GCNs → pool → unpool → two GCNs → linear head back to the input width.

    Unpooling is ``C · X_pool`` for the assignment-based pools and a row
    scatter back to the kept positions for top-k.
    """

    def __init__(self, in_dim: int, config: RunConfig, k: int, rng: np.random.Generator) -> None:
        if config.pool not in RECONSTRUCT_POOLS:
            raise ConfigError(f"unsupported reconstruction pool {config.pool!r}", field="pool")
        hidden = config.hidden
        self.method = config.pool
        self.assignment_mode = config.assignment_mode
        self.pre: List[GcnLayer] = [
            GcnLayer(in_dim, hidden, rng, name="pre0"),
            GcnLayer(hidden, hidden, rng, name="pre1"),
        ]
        if self.method == "gmpool":
            self.pool: Module = GMPool(hidden, k, config.heads, rng, scale=config.scale_attention, name="pool")
        elif self.method == "topk":
            self.pool = TopKPool(hidden, config.ratio, rng, name="pool")
        else:
            self.pool = ClusterPool(hidden, k, rng, name="pool")
        self.post: List[GcnLayer] = [
            GcnLayer(hidden, hidden, rng, name="post0"),
            GcnLayer(hidden, hidden, rng, name="post1"),
        ]
        self.head = Linear(hidden, in_dim, rng, name="head")

    def forward(self, graph: Graph | GraphBatch) -> ReconOutput:
        layout = graph if isinstance(graph, GraphBatch) else make_batch([graph])
        if layout.num_graphs != 1:
            raise ConfigError("reconstruction runs on a single graph", field="graph")
        n = layout.num_nodes
        h = Tensor(layout.node_features)
        for layer in self.pre:
            h = layer(h, layout.plan)

        assignment = None
        kept = None
        if isinstance(self.pool, GMPool):
            out = self.pool(h, layout)
            c = assignment_tensor(out.attention, layout, self.assignment_mode)
            assignment = ops.reshape(c, (n, self.pool.k))
            unpooled = ops.matmul(assignment, ops.reshape(out.pooled, (self.pool.k, h.shape[1])))
        elif isinstance(self.pool, TopKPool):
            res = self.pool.select(h, layout)
            kept = res.kept
            unpooled = ops.segment_sum(res.nodes, kept, n)
        else:
            out = self.pool.cluster(h, layout)
            assignment = ops.reshape(out.assignment, (n, self.pool.k))
            unpooled = ops.matmul(assignment, ops.reshape(out.pooled, (self.pool.k, h.shape[1])))

        for layer in self.post:
            unpooled = layer(unpooled, layout.plan)
        return ReconOutput(self.head(unpooled), assignment, kept)


def reconstructed_adjacency(assignment: Tensor, edges: np.ndarray) -> Tensor:
    """``C (Cᵀ A C) Cᵀ`` as a dense ``n × n`` tensor."""
    n = assignment.shape[0]
    coarse = ops.matmul(assignment.T, adjacency_product(assignment, edges, n))
    return ops.matmul(ops.matmul(assignment, coarse), assignment.T)
