"""Pooling stack (attention, GMPool, SelfAtt, GMT) and baseline READOUTs."""

from gmtpool.pooling.attention import (  # noqa: F401
    AttentionOutput,
    MultiHeadAttention,
    attention,
    graph_multi_head,
    multi_head,
    pad_block,
    unpad_block,
)
from gmtpool.pooling.baselines import (  # noqa: F401
    ClusterPool,
    TopKPool,
    coarsen_adjacency,
    cluster_pool,
    keep_count,
    mean_pool,
    select_topk,
    sum_pool,
    topk_pool,
)
from gmtpool.pooling.gmpool import (  # noqa: F401
    AssignmentMatrix,
    GMPool,
    GmtPooler,
    SelfAttention,
    assignment_tensor,
    gmpool,
    gmt_readout,
    key_weights,
    self_att,
    split_assignment,
)
from gmtpool.pooling.registry import ReadoutSpec, build_readout, discover, get_registry, register_readout  # noqa: F401
