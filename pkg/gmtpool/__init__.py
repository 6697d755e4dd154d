from .errors import GmtError  # noqa: F401

# ---------------------------------------------------------------------------
# Public library API
# ---------------------------------------------------------------------------

# Graph containers and loaders
from .graphs import Dataset, Graph, GraphBatch, load_tu_dataset, make_batch  # noqa: F401

# READOUT modules
from .pooling import GmtPooler, build_readout, gmt_readout  # noqa: F401

# Run configuration
from .config import RunConfig  # noqa: F401

__all__ = [
    "GmtError",
    "Graph",
    "Dataset",
    "GraphBatch",
    "make_batch",
    "load_tu_dataset",
    "GmtPooler",
    "build_readout",
    "gmt_readout",
    "RunConfig",
]
