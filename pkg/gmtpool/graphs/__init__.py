"""Graph containers, TU-format I/O, synthetic generators and fold splitting."""

from gmtpool.graphs.graph import (  # noqa: F401
    Dataset,
    Graph,
    GraphBatch,
    PropagationPlan,
    canonical_edges,
    make_batch,
    split_batch,
)
from gmtpool.graphs.splits import FoldSplit, stratified_kfold  # noqa: F401
from gmtpool.graphs.synthetic import export_csv, gen_erdos_renyi, gen_grid, gen_ring  # noqa: F401
from gmtpool.graphs.tu import load_tu_dataset, max_degree, save_tu_dataset  # noqa: F401

__all__ = [
    "Dataset",
    "FoldSplit",
    "Graph",
    "GraphBatch",
    "PropagationPlan",
    "canonical_edges",
    "export_csv",
    "gen_erdos_renyi",
    "gen_grid",
    "gen_ring",
    "load_tu_dataset",
    "make_batch",
    "max_degree",
    "save_tu_dataset",
    "split_batch",
    "stratified_kfold",
]
