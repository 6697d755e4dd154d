"""Builtin READOUT registrations."""

from __future__ import annotations

from gmtpool.autodiff.nn import Module
from gmtpool.autodiff.tensor import Tensor
from gmtpool.graphs.graph import GraphBatch
from gmtpool.pooling.baselines import ClusterPool, TopKPool, mean_pool, sum_pool
from gmtpool.pooling.gmpool import GmtPooler
from gmtpool.pooling.registry import ReadoutSpec, register_readout


class SumReadout(Module):
    def __init__(self, dim: int) -> None:
        self.out_dim = dim

    def forward(self, h: Tensor, layout: GraphBatch) -> Tensor:
        return sum_pool(h, layout.graph_id, layout.num_graphs)


class MeanReadout(Module):
    def __init__(self, dim: int) -> None:
        self.out_dim = dim

    def forward(self, h: Tensor, layout: GraphBatch) -> Tensor:
        return mean_pool(h, layout.graph_id, layout.num_graphs)


def _gmt(dim: int, spec: ReadoutSpec, **flags) -> GmtPooler:
    return GmtPooler(dim, spec.k, spec.heads, spec.rng, scale=spec.scale, dropout=spec.dropout, **flags)


@register_readout("gmt", "Graph Multiset Transformer: GMPool_k (GMH) -> SelfAtt -> GMPool_1")
def build_gmt(dim: int, spec: ReadoutSpec) -> Module:
    return _gmt(dim, spec)


@register_readout("gmt_mh", "GMT without graph attention: linear keys/values in the first pool")
def build_gmt_mh(dim: int, spec: ReadoutSpec) -> Module:
    return _gmt(dim, spec, use_gmh=False)


@register_readout("gmt_nosa", "GMT without the self-attention block")
def build_gmt_nosa(dim: int, spec: ReadoutSpec) -> Module:
    return _gmt(dim, spec, use_selfatt=False)


@register_readout("sum", "Per-graph sum of node rows")
def build_sum(dim: int, spec: ReadoutSpec) -> Module:
    return SumReadout(dim)


@register_readout("mean", "Per-graph mean of node rows")
def build_mean(dim: int, spec: ReadoutSpec) -> Module:
    return MeanReadout(dim)


@register_readout("topk", "Top-k node drop with tanh gating, then mean")
def build_topk(dim: int, spec: ReadoutSpec) -> Module:
    return TopKPool(dim, spec.ratio, spec.rng)


@register_readout("cluster", "Soft node clustering with dense coarsening, then mean")
def build_cluster(dim: int, spec: ReadoutSpec) -> Module:
    return ClusterPool(dim, spec.k, spec.rng)
