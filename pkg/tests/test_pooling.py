import math

import numpy as np
import pytest

from gmtpool.autodiff import ops
from gmtpool.autodiff.gradcheck import check_gradients
from gmtpool.autodiff.nn import Module
from gmtpool.autodiff.tensor import Parameter, Tensor, no_grad
from gmtpool.errors import ConfigError, InvalidInputError, ParameterError
from gmtpool.graphs import Graph, GraphBatch, PropagationPlan, gen_erdos_renyi, gen_ring, make_batch
from gmtpool.layers import Encoder, GcnLayer, encode, gcn_forward
from gmtpool.pooling import (
    ClusterPool,
    GMPool,
    GmtPooler,
    MultiHeadAttention,
    ReadoutSpec,
    SelfAttention,
    TopKPool,
    attention,
    build_readout,
    cluster_pool,
    coarsen_adjacency,
    discover,
    get_registry,
    gmpool,
    gmt_readout,
    graph_multi_head,
    keep_count,
    key_weights,
    mean_pool,
    multi_head,
    register_readout,
    select_topk,
    self_att,
    sum_pool,
    topk_pool,
)
from gmtpool.pooling.gmpool import assignment_tensor, split_assignment

GRAD_TOL = 1e-4
INSTANCES = range(5)


def _graph(seed: int, n: int = 6, m: int = 7):
    return gen_erdos_renyi(n, m, seed=seed)


def _check(loss_fn, params):
    errors = check_gradients(loss_fn, params)
    assert max(errors.values()) < GRAD_TOL, errors


def _softmax_rows(s):
    w = np.exp(s - s.max(axis=-1, keepdims=True))
    return w / w.sum(axis=-1, keepdims=True)


def _layer_norm(x):
    mu = x.mean(axis=-1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + ops.LN_EPS)


def _heads_oracle(q, keys_in, values_in, mh):
    """Run every head on its own column block, concatenate, project by Wo."""
    d = mh.dim
    outs = []
    for i in range(mh.heads):
        cols = slice(i * d, (i + 1) * d)
        qi = q @ mh.q_proj.weight.data[:, cols]
        ki = keys_in @ mh.k_proj.weight.data[:, cols]
        vi = values_in @ mh.v_proj.weight.data[:, cols]
        outs.append(_softmax_rows(qi @ ki.T / np.sqrt(d)) @ vi)
    return np.concatenate(outs, axis=1) @ mh.o_proj.weight.data


# ---------------------------------------------------------------------------
# attention
# ---------------------------------------------------------------------------


def test_attention_weights_sum_to_one(rng):
    q, k, v = rng.standard_normal((2, 3)), rng.standard_normal((4, 3)), rng.standard_normal((4, 2))
    out = attention(q, k, v)
    np.testing.assert_allclose(out.weights.data.sum(axis=-1), 1.0)
    scores = q @ k.T / np.sqrt(3)
    w = np.exp(scores - scores.max(axis=-1, keepdims=True))
    w /= w.sum(axis=-1, keepdims=True)
    np.testing.assert_allclose(out.output.data, w @ v)

    by_query = attention(q, k, v, axis="query")
    np.testing.assert_allclose(by_query.weights.data.sum(axis=-2), 1.0)


def test_attention_rejects_empty_key_set(rng):
    with pytest.raises(InvalidInputError):
        attention(rng.standard_normal((2, 3)), np.zeros((0, 3)), np.zeros((0, 3)))
    mask = np.array([[True, False], [False, False]])
    with pytest.raises(InvalidInputError):
        attention(rng.standard_normal((2, 3)), rng.standard_normal((2, 3)), rng.standard_normal((2, 3)), mask=mask)


def test_single_key_returns_its_value_for_every_query(rng):
    v = rng.standard_normal((1, 3))
    out = attention(rng.standard_normal((5, 2)), rng.standard_normal((1, 2)), v)
    np.testing.assert_array_equal(out.weights.data, np.ones((5, 1)))
    np.testing.assert_array_equal(out.output.data, np.repeat(v, 5, axis=0))


def test_identical_keys_average_the_values(rng):
    k = np.tile(rng.standard_normal((1, 3)), (4, 1))
    v = rng.standard_normal((4, 2))
    out = attention(rng.standard_normal((3, 3)), k, v)
    np.testing.assert_allclose(out.weights.data, 0.25, rtol=0, atol=1e-15)
    np.testing.assert_allclose(out.output.data, np.tile(v.mean(axis=0), (3, 1)), rtol=0, atol=1e-12)


def test_two_queries_three_keys_match_direct_evaluation():
    q = np.array([[1.0, 0.0], [0.5, -1.0]])
    k = np.array([[1.0, 1.0], [0.0, 2.0], [-1.0, 0.5]])
    v = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, -1.0], [3.0, 1.0, 0.0]])
    expected = np.zeros((2, 3))
    for i in range(2):
        scores = [float(q[i] @ k[j]) / np.sqrt(2.0) for j in range(3)]
        weights = [np.exp(s) for s in scores]
        total = sum(weights)
        for j in range(3):
            expected[i] += weights[j] / total * v[j]
    np.testing.assert_allclose(attention(q, k, v).output.data, expected, rtol=0, atol=1e-10)


def test_multi_head_gradients():
    for seed in INSTANCES:
        local = np.random.default_rng(seed)
        mh = MultiHeadAttention(4, 2, local)
        q = Parameter(local.standard_normal((3, 4)), name="q")
        kv = Parameter(local.standard_normal((5, 4)), name="kv")
        w = local.standard_normal((3, 4))
        _check(lambda: ops.sum(multi_head(q, kv, mh) * w), [q, kv, *mh.parameters()])


def test_graph_multi_head_gradients():
    for seed in INSTANCES:
        local = np.random.default_rng(seed)
        g = _graph(seed)
        gmh = MultiHeadAttention(4, 2, local, graph_kv=True)
        q = Parameter(local.standard_normal((2, 4)), name="q")
        h = Parameter(local.standard_normal((6, 4)), name="h")
        w = local.standard_normal((2, 4))
        _check(lambda: ops.sum(graph_multi_head(q, h, g.edges, gmh) * w), [q, h, *gmh.parameters()])


def test_graph_multi_head_with_identity_adjacency_equals_multi_head(rng):
    gmh = MultiHeadAttention(4, 2, rng, graph_kv=True)
    mh = MultiHeadAttention(4, 2, rng, graph_kv=False)
    mh.q_proj.weight.assign(gmh.q_proj.weight.data)
    mh.k_proj.weight.assign(gmh.k_proj.weight.data)
    mh.v_proj.weight.assign(gmh.v_proj.weight.data)
    mh.o_proj.weight.assign(gmh.o_proj.weight.data)
    g = _graph(3)
    q, h = rng.standard_normal((3, 4)), rng.standard_normal((6, 4))
    a = graph_multi_head(q, h, g.edges, gmh, identity_adjacency=True).data
    b = multi_head(q, h, mh).data
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
    c = graph_multi_head(q, h, g.edges, gmh).data
    assert not np.allclose(a, c)


def test_multi_head_width_mismatch(rng):
    mh = MultiHeadAttention(4, 1, rng)
    with pytest.raises(ParameterError):
        multi_head(np.zeros((1, 3)), np.zeros((2, 4)), mh)


def test_single_head_with_identity_projections_is_plain_attention(rng):
    mh = MultiHeadAttention(3, 1, rng)
    for proj in (mh.q_proj, mh.k_proj, mh.v_proj, mh.o_proj):
        proj.weight.assign(np.eye(3))
    q, kv = rng.standard_normal((2, 3)), rng.standard_normal((5, 3))
    np.testing.assert_allclose(multi_head(q, kv, mh).data, attention(q, kv, kv).output.data, rtol=0, atol=1e-12)


def test_zero_output_projection_gives_zero(rng):
    mh = MultiHeadAttention(4, 2, rng)
    mh.o_proj.weight.assign(np.zeros_like(mh.o_proj.weight.data))
    out = multi_head(rng.standard_normal((3, 4)), rng.standard_normal((6, 4)), mh)
    np.testing.assert_array_equal(out.data, np.zeros((3, 4)))


def test_multi_head_matches_per_head_oracle(rng):
    mh = MultiHeadAttention(4, 2, rng)
    q, kv = rng.standard_normal((3, 4)), rng.standard_normal((5, 4))
    np.testing.assert_allclose(multi_head(q, kv, mh).data, _heads_oracle(q, kv, kv, mh), rtol=0, atol=1e-10)


def test_graph_multi_head_on_ring_matches_dense_composition(rng):
    g = gen_ring(4)
    gmh = MultiHeadAttention(3, 1, rng, graph_kv=True)
    q, h = rng.standard_normal((2, 3)), rng.standard_normal((4, 3))
    spread = PropagationPlan.gcn(g.edges, 4).dense() @ h
    expected = _heads_oracle(q, spread, spread, gmh)
    np.testing.assert_allclose(graph_multi_head(q, h, g.edges, gmh).data, expected, rtol=0, atol=1e-10)

    # no edges: the self-loop normalisation is the identity, so GMH reduces to MH
    edge_free = graph_multi_head(q, h, np.zeros((0, 2)), gmh).data
    np.testing.assert_allclose(edge_free, _heads_oracle(q, h, h, gmh), rtol=0, atol=1e-10)


# ---------------------------------------------------------------------------
# GMPool / SelfAtt / GMT
# ---------------------------------------------------------------------------


def test_gmpool_gradients():
    for seed in INSTANCES:
        local = np.random.default_rng(seed)
        g = _graph(seed)
        block = GMPool(4, 2, 2, local)
        h = Parameter(local.standard_normal((6, 4)), name="h")
        w = local.standard_normal((2, 4))
        _check(lambda: ops.sum(gmpool(h, g.edges, block)[0] * w), [h, *block.parameters()])


def test_self_attention_gradients():
    for seed in INSTANCES:
        local = np.random.default_rng(seed)
        block = SelfAttention(4, 2, local)
        h = Parameter(local.standard_normal((3, 4)), name="h")
        w = local.standard_normal((3, 4))
        _check(lambda: ops.sum(self_att(h, block) * w), [h, *block.parameters()])


def test_gmt_readout_gradients():
    local = np.random.default_rng(0)
    g = _graph(0)
    pooler = GmtPooler(4, 2, 2, local)
    h = Parameter(local.standard_normal((6, 4)), name="h")
    w = local.standard_normal(4)
    _check(lambda: ops.sum(gmt_readout(pooler, h, g.edges) * w), [h, *pooler.parameters()])


def test_gmpool_shapes_and_assignment(rng):
    g = _graph(1, n=9, m=12)
    block = GMPool(5, 3, 2, rng)
    h = rng.standard_normal((9, 5))
    pooled, assignment = gmpool(h, g.edges, block)
    assert pooled.shape == (3, 5)
    assert (assignment.n, assignment.k) == (9, 3)
    assert assignment.is_valid()
    _, by_key = gmpool(h, g.edges, block, mode="key")
    assert by_key.is_valid()
    assert by_key.hard_labels().shape == (9,)


def test_single_node_assignment_is_uniform(rng):
    block = GMPool(3, 4, 2, rng)
    h = Tensor(rng.standard_normal((1, 3)))
    out = block(h, GraphBatch.uniform(1, 1, 3))
    # every seed attends fully to the one node
    np.testing.assert_array_equal(key_weights(out.attention).data, np.ones((1, 1, 4)))
    _, assignment = gmpool(h, np.zeros((0, 2)), block, mode="key")
    np.testing.assert_allclose(assignment.values, np.full((1, 4), 0.25))
    assert assignment.is_valid()


@pytest.mark.parametrize("n", [1, 5, 50])
def test_gmpool_output_has_k_rows(rng, n):
    g = gen_erdos_renyi(n, min(2 * n, n * (n - 1) // 2), seed=n)
    block = GMPool(4, 3, 2, rng)
    pooled, assignment = gmpool(rng.standard_normal((n, 4)), g.edges, block)
    assert pooled.shape == (3, 4)
    assert (assignment.n, assignment.k) == (n, 3)
    assert assignment.is_valid()


def test_gmpool_is_permutation_invariant(rng):
    g = gen_erdos_renyi(12, 20, seed=5)
    block = GMPool(4, 3, 2, rng)
    h = rng.standard_normal((12, 4))
    with no_grad():
        base, c = gmpool(h, g.edges, block)
        for _ in range(100):
            perm = rng.permutation(12)
            pooled, moved = gmpool(h[perm], g.permute(perm).edges, block)
            np.testing.assert_allclose(pooled.data, base.data, rtol=0, atol=1e-10)
            np.testing.assert_allclose(moved.values, c.values[perm], rtol=0, atol=1e-10)


def test_self_attention_single_row_oracle(rng):
    block = SelfAttention(4, 2, rng)
    h = rng.standard_normal((1, 4))
    # one key: each head returns its value row whatever the query
    z = _layer_norm(h + h @ block.attn.v_proj.weight.data @ block.attn.o_proj.weight.data)
    fc1, fc2 = block.rff.fc1, block.rff.fc2
    ff = np.maximum(z @ fc1.weight.data + fc1.bias.data, 0.0) @ fc2.weight.data + fc2.bias.data
    np.testing.assert_allclose(self_att(h, block).data, _layer_norm(z + ff), rtol=0, atol=1e-10)


def test_self_attention_duplicates_and_equivariance(rng):
    block = SelfAttention(4, 2, rng)
    row = rng.standard_normal(4)
    h = np.stack([row, rng.standard_normal(4), row, rng.standard_normal(4)])
    out = self_att(h, block).data
    np.testing.assert_allclose(out[0], out[2], rtol=0, atol=1e-12)
    for _ in range(10):
        perm = rng.permutation(4)
        np.testing.assert_allclose(self_att(h[perm], block).data, out[perm], rtol=0, atol=1e-10)


def test_empty_graph_is_rejected(rng):
    pooler = GmtPooler(3, 1, 1, rng)
    with pytest.raises(InvalidInputError):
        gmt_readout(pooler, np.zeros((0, 3)), np.zeros((0, 2)))


def test_gmt_readout_permutation_invariance():
    rng = np.random.default_rng(42)
    dim = 6
    for trial in range(20):
        n = int(rng.integers(3, 51))
        m = int(rng.integers(n - 1, min(2 * n, n * (n - 1) // 2) + 1))
        g = gen_erdos_renyi(n, m, seed=trial)
        pooler = GmtPooler(dim, math.ceil(0.25 * n), 2, rng)
        pooler.eval()
        h = rng.standard_normal((n, dim))
        with no_grad():
            base = gmt_readout(pooler, h, g.edges).data
            for _ in range(100):
                perm = rng.permutation(n)
                p = g.permute(perm)
                out = gmt_readout(pooler, h[perm], p.edges).data
                assert np.max(np.abs(out - base)) <= 1e-8 * max(np.max(np.abs(base)), 1.0)


def test_batched_matches_single_graph():
    rng = np.random.default_rng(7)
    dim = 5
    graphs = []
    for i in range(32):
        n = int(rng.integers(2, 12))
        m = int(rng.integers(0, n * (n - 1) // 2 + 1))
        g = gen_erdos_renyi(n, m, seed=i)
        graphs.append(Graph(node_features=rng.standard_normal((n, dim)), edges=g.edges))
    batch = make_batch(graphs)
    for name in ("gmt", "gmt_mh", "gmt_nosa", "sum", "mean", "topk", "cluster"):
        readout = build_readout(name, dim, ReadoutSpec(rng=np.random.default_rng(0), k=3, heads=2))
        readout.eval()
        with no_grad():
            batched = readout(Tensor(batch.node_features), batch).data
            single = np.stack(
                [readout(Tensor(g.node_features), make_batch([g])).data[0] for g in graphs]
            )
        assert batched.shape == (32, dim)
        np.testing.assert_allclose(batched, single, rtol=0, atol=1e-10, err_msg=name)


def test_batched_assignment_split(rng):
    graphs = [gen_ring(4), gen_ring(7)]
    batch = make_batch(graphs)
    block = GMPool(2, 2, 1, rng)
    out = block(Tensor(batch.node_features), batch)
    c = assignment_tensor(out.attention, batch, "query")
    assert c.shape == (2, 7, 2)
    np.testing.assert_array_equal(c.data[0, 4:], 0.0)
    mats = split_assignment(c, batch)
    assert [m.n for m in mats] == [4, 7]
    assert all(m.is_valid() for m in mats)


def test_star_and_path_are_separated():
    star = [[0, i] for i in range(1, 6)]
    path = [[i, i + 1] for i in range(5)]
    x = np.ones((6, 1))
    separated = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        encoder = Encoder(1, 16, rng, num_layers=3)
        pooler = GmtPooler(16, 2, 2, rng)
        encoder.eval()
        pooler.eval()
        with no_grad():
            a = gmt_readout(pooler, encode(encoder, x, star), star).data
            b = gmt_readout(pooler, encode(encoder, x, path), path).data
        separated += np.linalg.norm(a - b) >= 1e-3
    assert separated >= 19


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------


def test_sum_and_mean_pool():
    h = np.arange(10.0).reshape(5, 2)
    ids = np.array([0, 0, 1, 1, 1])
    np.testing.assert_array_equal(sum_pool(h, ids).data, [[2, 4], [18, 21]])
    np.testing.assert_array_equal(mean_pool(h, ids).data, [[1, 2], [6, 7]])


def test_sum_and_mean_match_loop_oracle(rng):
    h = rng.standard_normal((9, 3))
    ids = np.array([0, 0, 1, 1, 1, 1, 2, 2, 2])
    sums = np.zeros((3, 3))
    counts = np.zeros(3)
    for i in range(9):
        sums[ids[i]] += h[i]
        counts[ids[i]] += 1
    np.testing.assert_allclose(sum_pool(h, ids).data, sums, rtol=0, atol=1e-12)
    np.testing.assert_allclose(mean_pool(h, ids).data, sums / counts[:, None], rtol=0, atol=1e-12)
    for _ in range(10):
        perm = rng.permutation(9)
        np.testing.assert_allclose(sum_pool(h[perm], ids[perm]).data, sums, rtol=0, atol=1e-12)
        np.testing.assert_allclose(mean_pool(h[perm], ids[perm]).data, sums / counts[:, None], rtol=0, atol=1e-12)


def test_keep_count():
    assert keep_count(0.25, 10) == 3
    assert keep_count(2 / 3, 3) == 2
    assert keep_count(0.25, 1) == 1
    assert keep_count(1.0, 7) == 7
    for bad in (0.0, 1.5, -0.1):
        with pytest.raises(ParameterError):
            keep_count(bad, 4)


def test_select_topk_ties_and_batches():
    scores = np.array([1.0, 1.0, 1.0, 0.0, 5.0, 4.0, 6.0])
    graph_id = np.array([0, 0, 0, 0, 1, 1, 1])
    kept = select_topk(scores, graph_id, np.array([4, 3]), 0.5)
    np.testing.assert_array_equal(kept, [0, 1, 4, 6])
    np.testing.assert_array_equal(select_topk(np.array([3.0, 1.0, 2.0]), np.zeros(3, np.int64), np.array([3]), 2 / 3), [0, 2])


def test_select_topk_matches_stable_sort():
    rng = np.random.default_rng(11)
    for _ in range(50):
        counts = rng.integers(1, 12, size=3)
        graph_id = np.repeat(np.arange(3), counts)
        # few distinct values so ties are common
        scores = rng.integers(0, 4, size=graph_id.size).astype(np.float64)
        ratio = float(rng.choice([0.25, 0.5, 0.75, 1.0]))
        expected = []
        start = 0
        for c in counts:
            local = sorted(range(start, start + c), key=lambda i: (-scores[i], i))
            expected.extend(local[: max(1, math.ceil(ratio * c))])
            start += c
        np.testing.assert_array_equal(select_topk(scores, graph_id, counts, ratio), sorted(expected))


def test_topk_gate_gradients():
    for seed in INSTANCES:
        local = np.random.default_rng(seed)
        g = _graph(seed, n=8, m=10)
        score = Parameter(local.standard_normal(4), name="p")
        h = Parameter(local.standard_normal((8, 4)), name="h")
        w = local.standard_normal((2, 4))
        _check(lambda: ops.sum(topk_pool(h, g.edges, score, 0.25)[0] * w), [h, score])


def test_topk_pool_keeps_induced_edges(rng):
    g = gen_ring(8)
    score = Parameter(np.array([1.0, 0.0]), name="p")
    h = np.column_stack([np.arange(8.0), np.zeros(8)])
    nodes, edges, kept = topk_pool(h, g.edges, score, 0.25)
    np.testing.assert_array_equal(kept, [6, 7])
    np.testing.assert_array_equal(edges, [[0, 1]])
    np.testing.assert_allclose(nodes.data[:, 0], h[kept, 0] * np.tanh(h[kept, 0]))


def test_topk_readout_shape(rng):
    batch = make_batch([gen_ring(5), gen_ring(9)])
    pool = TopKPool(2, 0.5, rng)
    assert pool(Tensor(batch.node_features), batch).shape == (2, 2)
    with pytest.raises(ParameterError):
        TopKPool(2, 0.0, rng)


def test_cluster_assignment_gradients():
    for seed in INSTANCES:
        local = np.random.default_rng(seed)
        g = _graph(seed)
        assign = GcnLayer(4, 3, local, activation=None, name="assign")
        h = Parameter(local.standard_normal((6, 4)), name="h")
        w1, w2 = local.standard_normal((3, 4)), local.standard_normal((3, 3))

        def loss():
            pooled, adj = cluster_pool(h, g.edges, assign)
            return ops.sum(pooled * w1) + ops.sum(adj * w2)

        _check(loss, [h, *assign.parameters()])


def test_cluster_pool_coarsening(rng):
    g = _graph(2, n=7, m=9)
    assign = GcnLayer(3, 2, rng, activation=None)
    h = rng.standard_normal((7, 3))
    pooled, adj = cluster_pool(h, g.edges, assign)
    logits = gcn_forward(assign, h, g.edges, 7).data
    c = np.exp(logits - logits.max(axis=1, keepdims=True))
    c /= c.sum(axis=1, keepdims=True)
    a = g.dense_adjacency()
    np.testing.assert_allclose(pooled.data, c.T @ h, atol=1e-12)
    np.testing.assert_allclose(adj.data, c.T @ a @ c, atol=1e-12)
    np.testing.assert_allclose(coarsen_adjacency(c, g.edges), c.T @ a @ c, atol=1e-12)


def test_coarsen_adjacency_edge_cases(rng):
    triangle = np.array([[0, 1], [1, 2], [0, 2]])
    np.testing.assert_array_equal(coarsen_adjacency(np.eye(3), triangle), np.ones((3, 3)) - np.eye(3))
    g = gen_erdos_renyi(8, 11, seed=4)
    np.testing.assert_array_equal(coarsen_adjacency(np.eye(8), g.edges), g.dense_adjacency())
    c = rng.uniform(size=(5, 2))
    np.testing.assert_array_equal(coarsen_adjacency(c, np.zeros((0, 2))), np.zeros((2, 2)))


def test_single_cluster_collects_everything(rng):
    g = gen_erdos_renyi(6, 7, seed=9)
    h = rng.standard_normal((6, 3))
    pooled, adj = cluster_pool(h, g.edges, GcnLayer(3, 1, rng, activation=None))
    np.testing.assert_allclose(pooled.data, h.sum(axis=0, keepdims=True), rtol=0, atol=1e-12)
    np.testing.assert_allclose(adj.data, [[2.0 * g.num_edges]], rtol=0, atol=1e-12)


def test_cluster_readout_shape(rng):
    batch = make_batch([gen_ring(5), gen_ring(3)])
    pool = ClusterPool(2, 2, rng)
    assert pool(Tensor(batch.node_features), batch).shape == (2, 2)
    with pytest.raises(ParameterError):
        ClusterPool(2, 0, rng)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def test_builtin_readouts_registered():
    discover()
    names = set(get_registry())
    assert {"gmt", "gmt_mh", "gmt_nosa", "sum", "mean", "topk", "cluster"} <= names


def test_unknown_readout_is_config_error(rng):
    with pytest.raises(ConfigError) as info:
        build_readout("nope", 4, ReadoutSpec(rng=rng))
    assert info.value.field == "pool"


def test_custom_readout_registration(rng):
    class MaxReadout(Module):
        def __init__(self, dim):
            self.out_dim = dim

        def forward(self, h, layout: GraphBatch):
            return Tensor(np.stack([h.data[layout.graph_id == b].max(axis=0) for b in range(layout.num_graphs)]))

    register_readout("max_test", "per-graph maximum")(lambda dim, spec: MaxReadout(dim))
    readout = build_readout("max_test", 2, ReadoutSpec(rng=rng))
    batch = make_batch([gen_ring(4)])
    np.testing.assert_allclose(readout(Tensor(batch.node_features), batch).data, [[1.0, 1.0]])
