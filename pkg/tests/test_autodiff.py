import numpy as np
import pytest

from gmtpool.autodiff import ops
from gmtpool.autodiff.gradcheck import check_gradients
from gmtpool.autodiff.memory import count_allocations, is_counting
from gmtpool.autodiff.nn import LayerNorm, Linear, RowFF
from gmtpool.autodiff.optim import Adam, adam_step
from gmtpool.autodiff.tensor import Parameter, Tensor, backward, no_grad
from gmtpool.errors import DimensionError, ParameterError, UsageError

TOL = 1e-6


def _param(rng, *shape, name="p"):
    return Parameter(rng.standard_normal(shape), name=name)


# ---------------------------------------------------------------------------
# backward mechanics
# ---------------------------------------------------------------------------


def test_shared_subexpression_accumulates():
    x = Parameter(np.array([1.5, -2.0]), name="x")
    y = ops.sum(x * x + x)
    backward(y)
    np.testing.assert_allclose(x.grad, 2 * x.data + 1)


def test_backward_needs_scalar():
    x = Parameter(np.ones(3), name="x")
    with pytest.raises(UsageError):
        backward(x * 2.0)


def test_unreachable_parameter_gets_zero_grad():
    a = Parameter(np.ones(2), name="a")
    b = Parameter(np.ones(3), name="b")
    backward(ops.sum(a * 3.0), [a, b])
    np.testing.assert_array_equal(a.grad, [3.0, 3.0])
    np.testing.assert_array_equal(b.grad, np.zeros(3))


def test_no_grad_records_nothing():
    x = Parameter(np.ones(2), name="x")
    with no_grad():
        y = x * 2.0
    assert not y.requires_grad
    assert y.is_leaf


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_matmul_matches_triple_loop(rng):
    a, b = rng.standard_normal((3, 4)), rng.standard_normal((4, 2))
    expected = np.zeros((3, 2))
    for i in range(3):
        for j in range(2):
            for k in range(4):
                expected[i, j] += a[i, k] * b[k, j]
    np.testing.assert_allclose(ops.matmul(Tensor(a), Tensor(b)).data, expected, rtol=0, atol=1e-12)
    square = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(ops.matmul(Tensor(square), Tensor(np.eye(2))).data, square)
    np.testing.assert_array_equal(ops.matmul(Tensor(np.eye(2)), Tensor(np.array([[5.0], [7.0]]))).data, [[5.0], [7.0]])


def test_softmax_values():
    np.testing.assert_array_equal(ops.softmax(Tensor(np.zeros(2)), axis=0).data, [0.5, 0.5])

    x = np.array([1.0, 2.0, 3.0])
    e = np.exp(x.astype(np.longdouble))
    oracle = (e / e.sum()).astype(np.float64)
    out = ops.softmax(Tensor(x), axis=0).data
    np.testing.assert_allclose(out, oracle, rtol=0, atol=1e-12)
    np.testing.assert_allclose(ops.softmax(Tensor(x + 1000.0), axis=0).data, out, rtol=0, atol=1e-12)
    with pytest.raises(DimensionError):
        ops.softmax(Tensor(x), axis=1)


# ---------------------------------------------------------------------------
# gradient checks
# ---------------------------------------------------------------------------


def test_elementwise_gradients(rng):
    a = Parameter(rng.uniform(0.5, 2.0, size=(3, 4)), name="a")
    b = Parameter(rng.uniform(0.5, 2.0, size=(4,)), name="b")

    def loss():
        z = ops.exp(a * 0.3) / b - ops.log(a) * ops.sqrt(b) + ops.tanh(a - b)
        return ops.mean(ops.relu(z) + z * z)

    errors = check_gradients(loss, [a, b])
    assert max(errors.values()) < TOL, errors


def test_batched_matmul_broadcast_gradients(rng):
    a = _param(rng, 1, 3, 4, name="a")
    b = _param(rng, 2, 4, 5, name="b")
    errors = check_gradients(lambda: ops.sum(ops.tanh(ops.matmul(a, b))), [a, b])
    assert max(errors.values()) < TOL, errors


def test_masked_softmax_gradients(rng):
    x = _param(rng, 2, 3, 5, name="x")
    mask = np.ones((2, 1, 5), dtype=bool)
    mask[1, 0, 3:] = False
    w = rng.standard_normal((2, 3, 5))
    for axis in (-1, -2):
        errors = check_gradients(lambda: ops.sum(ops.softmax(x, axis=axis, mask=mask) * w), [x])
        assert errors["x"] < TOL


def test_fully_masked_slice_is_zero():
    x = Tensor(np.ones((2, 3)))
    mask = np.array([[True, True, False], [False, False, False]])
    out = ops.softmax(x, axis=-1, mask=mask)
    np.testing.assert_allclose(out.data[0], [0.5, 0.5, 0.0])
    np.testing.assert_array_equal(out.data[1], np.zeros(3))


def test_layer_norm_gradients(rng):
    x = _param(rng, 4, 6, name="x")
    ln = LayerNorm(6)
    ln.gamma.assign(rng.uniform(0.5, 1.5, size=6))
    w = rng.standard_normal((4, 6))
    errors = check_gradients(lambda: ops.sum(ln(x) * w), [x, ln.gamma, ln.beta])
    assert max(errors.values()) < TOL, errors


def test_layer_norm_output_statistics(rng):
    out = LayerNorm(8)(Tensor(rng.standard_normal((5, 8)) * 3 + 2))
    np.testing.assert_allclose(out.data.mean(axis=-1), 0.0, atol=1e-12)
    np.testing.assert_allclose(out.data.var(axis=-1), 1.0, atol=1e-4)


def test_graph_scatter_gradients(rng):
    x = _param(rng, 5, 3, name="x")
    src = np.array([0, 1, 2, 3, 4, 0, 0])
    dst = np.array([1, 2, 3, 4, 0, 0, 3])
    weight = rng.uniform(0.1, 1.0, size=src.size)
    ids = np.array([0, 0, 1, 1, 1])
    pos = np.array([0, 1, 0, 1, 2])
    w = rng.standard_normal((2, 3, 3))

    def loss():
        spread = ops.propagate(x, src, dst, weight, 5)
        return ops.sum(ops.pad_segments(spread, ids, pos, 2, 3) * w) + ops.sum(ops.segment_sum(x * x, ids, 2))

    assert check_gradients(loss, [x])["x"] < TOL


def test_propagate_matches_dense_product(rng):
    x = rng.standard_normal((4, 2))
    src = np.array([0, 1, 2, 3, 1])
    dst = np.array([1, 2, 3, 0, 1])
    weight = np.array([0.5, 1.0, 2.0, -1.0, 3.0])
    dense = np.zeros((4, 4))
    np.add.at(dense, (dst, src), weight)
    out = ops.propagate(Tensor(x), src, dst, weight, 4)
    np.testing.assert_allclose(out.data, dense @ x)


def test_cross_entropy_gradients_and_value(rng):
    logits = _param(rng, 6, 3, name="logits")
    labels = np.array([0, 2, 1, 1, 0, 2])
    assert check_gradients(lambda: ops.cross_entropy(logits, labels), [logits])["logits"] < TOL

    uniform = ops.cross_entropy(Tensor(np.zeros((2, 4))), np.array([0, 3]))
    assert uniform.item() == pytest.approx(np.log(4.0))


def test_getitem_repeated_index_gradient():
    x = Parameter(np.arange(4.0), name="x")
    backward(ops.sum(ops.getitem(x, np.array([1, 1, 3]))))
    np.testing.assert_array_equal(x.grad, [0.0, 2.0, 0.0, 1.0])


def test_row_feed_forward_gradients(rng):
    block = RowFF(3, rng, hidden=4)
    x = Tensor(rng.standard_normal((5, 3)))
    errors = check_gradients(lambda: ops.mse(block(x), np.ones((5, 3))), block.parameters())
    assert max(errors.values()) < TOL, errors


def test_row_feed_forward_is_row_wise(rng):
    block = RowFF(3, rng)
    row = rng.standard_normal(3)
    out = block(Tensor(np.stack([row, rng.standard_normal(3), row]))).data
    np.testing.assert_allclose(out[0], out[2], rtol=0, atol=1e-14)

    for layer in (block.fc1, block.fc2):
        layer.weight.assign(np.zeros_like(layer.weight.data))
    np.testing.assert_array_equal(block(Tensor(rng.standard_normal((4, 3)))).data, np.zeros((4, 3)))


def test_backward_is_bit_identical_across_runs(rng):
    block = RowFF(4, rng)
    ln = LayerNorm(4)
    x = Tensor(rng.standard_normal((6, 4)))
    target = rng.standard_normal((6, 4))
    params = [*block.parameters(), *ln.parameters()]
    grads = []
    for _ in range(2):
        for p in params:
            p.zero_grad()
        backward(ops.mse(ln(block(x)), target), params)
        grads.append([p.grad.copy() for p in params])
    for first, second in zip(*grads):
        np.testing.assert_array_equal(first, second)


def test_dropout_is_identity_in_eval(rng):
    x = Tensor(rng.standard_normal((3, 3)))
    assert ops.dropout(x, 0.5, rng, training=False) is x
    with pytest.raises(ParameterError):
        ops.dropout(x, 1.0, rng, training=True)


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------


def test_adam_before_backward_is_usage_error():
    p = Parameter(np.ones(2), name="p")
    with pytest.raises(UsageError):
        adam_step([p], lr=0.1)


def test_adam_first_step_moves_by_lr():
    p = Parameter(np.array([1.0, -1.0]), name="p")
    p.grad = np.array([0.3, -4.0])
    adam_step([p], lr=0.01)
    np.testing.assert_allclose(p.data, [0.99, -0.99], atol=1e-9)


def test_adam_zero_gradient_keeps_parameters():
    p = Parameter(np.array([0.3, -1.2, 4.0]), name="p")
    for _ in range(3):
        p.grad = np.zeros(3)
        adam_step([p], lr=0.1)
    np.testing.assert_array_equal(p.data, [0.3, -1.2, 4.0])


def test_adam_identical_parameters_stay_identical(rng):
    p = Parameter(np.full(4, 0.7), name="p")
    q = Parameter(np.full(4, 0.7), name="q")
    for _ in range(10):
        grad = rng.standard_normal(4)
        p.grad, q.grad = grad.copy(), grad.copy()
        adam_step([p, q], lr=0.05)
    np.testing.assert_array_equal(p.data, q.data)


def test_adam_two_scalar_steps_by_hand():
    p = Parameter(np.array([1.0]), name="p")
    p.grad = np.array([1.0])
    adam_step([p], lr=0.1)
    # m_hat = 1, v_hat = 1
    assert p.data[0] == pytest.approx(0.9, abs=1e-7)
    p.grad = np.array([-1.0])
    adam_step([p], lr=0.1)
    # m = 0.9 * 0.1 - 0.1 = -0.01, m_hat = -0.01 / 0.19; v_hat = 0.001999 / 0.001999 = 1
    assert p.data[0] == pytest.approx(0.9 + 0.1 * 0.01 / 0.19, abs=1e-7)


def test_coupled_and_decoupled_weight_decay():
    coupled = Parameter(np.array([2.0]), name="c")
    decoupled = Parameter(np.array([2.0]), name="d")
    for p, flag in ((coupled, False), (decoupled, True)):
        p.grad = np.zeros(1)
        adam_step([p], lr=0.1, weight_decay=0.1, decoupled=flag)
    np.testing.assert_allclose(coupled.data, [1.9], atol=1e-7)
    np.testing.assert_allclose(decoupled.data, [1.98], atol=1e-12)


def test_adam_fits_linear_regression(rng):
    x = rng.standard_normal((64, 3))
    y = x @ np.array([[1.0], [-2.0], [0.5]])
    model = Linear(3, 1, rng)
    opt = Adam(model.parameters(), lr=0.05)
    for _ in range(1000):
        loss = ops.mse(model(Tensor(x)), y)
        opt.zero_grad()
        backward(loss, opt.params)
        opt.step()
    assert loss.item() < 1e-4


def test_adam_rejects_non_positive_lr():
    with pytest.raises(ParameterError):
        Adam([Parameter(np.ones(1))], lr=0.0)


def test_state_dict_restores_parameters(rng):
    model = Linear(2, 2, rng)
    saved = model.state_dict()
    model.weight.assign(np.zeros((2, 2)))
    model.load_state_dict(saved)
    np.testing.assert_array_equal(model.weight.data, saved["weight"])
    with pytest.raises(DimensionError):
        model.weight.assign(np.zeros(3))


# ---------------------------------------------------------------------------
# allocation counter
# ---------------------------------------------------------------------------


def test_counter_tracks_peak_and_release():
    with count_allocations() as counter:
        assert is_counting()
        a = Tensor(np.zeros(10))
        b = Tensor(np.zeros(5))
        del a
        assert counter.live == 5
        del b
    assert counter.peak == 15
    assert counter.live == 0
    assert counter.allocations == 2
    assert not is_counting()


def test_counter_ignores_tensors_outside_window():
    before = Tensor(np.zeros(100))
    with count_allocations() as counter:
        _ = ops.mul(before, before)
    assert counter.peak == 100
