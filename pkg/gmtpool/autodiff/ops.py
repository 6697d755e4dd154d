"""Differentiable operations on :class:`~gmtpool.autodiff.tensor.Tensor`.

Every function computes its forward value with NumPy and registers a
closure returning one gradient per parent (``None`` for non-differentiable
inputs).  Broadcasting follows NumPy; gradients are summed back to each
parent's shape by :func:`_unbroadcast`.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from gmtpool.autodiff.tensor import Tensor, as_tensor
from gmtpool.errors import DimensionError, ParameterError

LN_EPS = 1e-5


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum *grad* over the axes that broadcasting expanded to reach *shape*."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shapes(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError.mismatch(op, a.shape, b.shape) from None


# ---------------------------------------------------------------------------
# Elementwise arithmetic
# ---------------------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shapes("add", a, b)

    def _backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor.from_op(a.data + b.data, (a, b), _backward, "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shapes("sub", a, b)

    def _backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return Tensor.from_op(a.data - b.data, (a, b), _backward, "sub")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shapes("mul", a, b)

    def _backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return Tensor.from_op(a.data * b.data, (a, b), _backward, "mul")


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shapes("div", a, b)
    out = a.data / b.data

    def _backward(g):
        return _unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)

    return Tensor.from_op(out, (a, b), _backward, "div")


def neg(a) -> Tensor:
    a = as_tensor(a)
    return Tensor.from_op(-a.data, (a,), lambda g: (-g,), "neg")


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return Tensor.from_op(out, (a,), lambda g: (g * out,), "exp")


def log(a: Tensor) -> Tensor:
    return Tensor.from_op(np.log(a.data), (a,), lambda g: (g / a.data,), "log")


def sqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)
    return Tensor.from_op(out, (a,), lambda g: (g / (2.0 * out),), "sqrt")


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return Tensor.from_op(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,), "relu")


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return Tensor.from_op(out, (a,), lambda g: (g * (1.0 - out * out),), "tanh")


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------


def matmul(a, b) -> Tensor:
    """Batched matrix product; leading axes broadcast like ``np.matmul``."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError.mismatch("matmul", a.shape, b.shape)
    try:
        out = np.matmul(a.data, b.data)
    except ValueError:
        raise DimensionError.mismatch("matmul", a.shape, b.shape) from None

    def _backward(g):
        ga = _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape) if a.requires_grad else None
        gb = _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape) if b.requires_grad else None
        return ga, gb

    return Tensor.from_op(out, (a, b), _backward, "matmul")


# ---------------------------------------------------------------------------
# Reductions and shape manipulation
# ---------------------------------------------------------------------------


def _expand_reduced(g: np.ndarray, shape: tuple, axis, keepdims: bool) -> np.ndarray:
    if axis is None:
        return np.broadcast_to(np.reshape(g, (1,) * len(shape)), shape)
    if not keepdims:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        axes = tuple(ax % len(shape) for ax in axes)
        for ax in sorted(axes):
            g = np.expand_dims(g, ax)
    return np.broadcast_to(g, shape)


def sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001 – mirrors numpy
    a = as_tensor(a)

    def _backward(g):
        return (np.array(_expand_reduced(g, a.shape, axis, keepdims)),)

    return Tensor.from_op(np.sum(a.data, axis=axis, keepdims=keepdims), (a,), _backward, "sum")


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    count = a.size if axis is None else int(np.prod([a.shape[ax] for ax in ((axis,) if isinstance(axis, int) else axis)]))

    def _backward(g):
        return (np.array(_expand_reduced(g, a.shape, axis, keepdims)) / count,)

    return Tensor.from_op(np.mean(a.data, axis=axis, keepdims=keepdims), (a,), _backward, "mean")


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise DimensionError.mismatch("reshape", a.shape, tuple(shape)) from None
    return Tensor.from_op(out, (a,), lambda g: (g.reshape(a.shape),), "reshape")


def swapaxes(a: Tensor, axis1: int, axis2: int) -> Tensor:
    return Tensor.from_op(
        np.swapaxes(a.data, axis1, axis2), (a,), lambda g: (np.swapaxes(g, axis1, axis2),), "swapaxes"
    )


def transpose(a: Tensor, axes: Sequence[int]) -> Tensor:
    inverse = np.argsort(axes)
    return Tensor.from_op(
        np.transpose(a.data, axes), (a,), lambda g: (np.transpose(g, inverse),), "transpose"
    )


def getitem(a: Tensor, index) -> Tensor:
    """Basic or advanced indexing; repeated indices accumulate in backward."""

    def _backward(g):
        grad = np.zeros_like(a.data)
        np.add.at(grad, index, g)
        return (grad,)

    return Tensor.from_op(a.data[index], (a,), _backward, "getitem")


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise DimensionError.mismatch("concat", *(t.shape for t in tensors)) from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def _backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor.from_op(out, tensors, _backward, "concat")


# ---------------------------------------------------------------------------
# Normalisation
# ---------------------------------------------------------------------------


def softmax(x: Tensor, axis: int = -1, mask: Optional[np.ndarray] = None) -> Tensor:
    """Max-stabilised softmax along *axis*.

    *mask* (boolean, broadcastable to ``x``) marks valid entries; masked
    entries get weight 0 and a slice with no valid entry is all zeros.
    """
    if not -x.ndim <= axis < x.ndim:
        raise DimensionError(f"softmax: axis {axis} out of range for shape {x.shape}", data={"shape": list(x.shape)})
    z = x.data if mask is None else np.where(mask, x.data, -np.inf)
    top = np.max(z, axis=axis, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    e = np.exp(z - top)
    total = np.sum(e, axis=axis, keepdims=True)
    out = e / np.where(total > 0, total, 1.0)

    def _backward(g):
        return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)

    return Tensor.from_op(out, (x,), _backward, "softmax")


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    out = shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
    probs = np.exp(out)

    def _backward(g):
        return (g - probs * np.sum(g, axis=axis, keepdims=True),)

    return Tensor.from_op(out, (x,), _backward, "log_softmax")


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = LN_EPS) -> Tensor:
    """Normalise the last axis to zero mean / unit variance, then scale and shift."""
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise DimensionError.mismatch("layer_norm", x.shape, gamma.shape, beta.shape)
    mu = x.data.mean(axis=-1, keepdims=True)
    centred = x.data - mu
    var = (centred * centred).mean(axis=-1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = centred * rstd
    out = xhat * gamma.data + beta.data

    def _backward(g):
        gx = gg = gb = None
        if x.requires_grad:
            gxhat = g * gamma.data
            gx = rstd * (
                gxhat
                - gxhat.mean(axis=-1, keepdims=True)
                - xhat * (gxhat * xhat).mean(axis=-1, keepdims=True)
            )
        lead = tuple(range(g.ndim - 1))
        if gamma.requires_grad:
            gg = np.sum(g * xhat, axis=lead)
        if beta.requires_grad:
            gb = np.sum(g, axis=lead)
        return gx, gg, gb

    return Tensor.from_op(out, (x, gamma, beta), _backward, "layer_norm")


def dropout(x: Tensor, p: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout; identity outside training or when ``p == 0``."""
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"dropout rate must lie in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    keep = (rng.random(x.shape) >= p) / (1.0 - p)
    return Tensor.from_op(x.data * keep, (x,), lambda g: (g * keep,), "dropout")


# ---------------------------------------------------------------------------
# Graph scatter / gather
# ---------------------------------------------------------------------------

# Above this many (edge × feature) products the scatter runs column by column
# so the gathered message matrix is never materialised.
_DENSE_SCATTER_LIMIT = 2_000_000


def _weighted_scatter(x: np.ndarray, src: np.ndarray, dst: np.ndarray, weight: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, x.shape[1]), dtype=x.dtype)
    if src.size == 0:
        return out
    if src.size * x.shape[1] <= _DENSE_SCATTER_LIMIT:
        np.add.at(out, dst, weight[:, None] * x[src])
    else:
        for col in range(x.shape[1]):
            out[:, col] = np.bincount(dst, weights=weight * x[src, col], minlength=n)
    return out


def propagate(x: Tensor, src: np.ndarray, dst: np.ndarray, weight: np.ndarray, n: int) -> Tensor:
    """``out[dst] += weight * x[src]`` over the edge list, in fixed edge order.

    Equivalent to multiplying by the sparse matrix ``M[dst, src] = weight``
    without building it; the backward pass scatters along the reversed edges.
    """
    if x.ndim != 2:
        raise DimensionError.mismatch("propagate", x.shape)

    def _backward(g):
        return (_weighted_scatter(g, dst, src, weight, x.shape[0]),)

    return Tensor.from_op(_weighted_scatter(x.data, src, dst, weight, n), (x,), _backward, "propagate")


def segment_sum(x: Tensor, segment_ids: np.ndarray, num_segments: int) -> Tensor:
    """Sum rows of *x* that share a segment id."""
    out = np.zeros((num_segments,) + x.shape[1:], dtype=x.data.dtype)
    np.add.at(out, segment_ids, x.data)
    return Tensor.from_op(out, (x,), lambda g: (g[segment_ids],), "segment_sum")


def pad_segments(x: Tensor, segment_ids: np.ndarray, positions: np.ndarray, num_segments: int, width: int) -> Tensor:
    """Scatter block rows into a zero-padded ``(num_segments, width, ...)`` tensor."""
    out = np.zeros((num_segments, width) + x.shape[1:], dtype=x.data.dtype)
    out[segment_ids, positions] = x.data
    return Tensor.from_op(out, (x,), lambda g: (g[segment_ids, positions],), "pad_segments")


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of integer *labels* under softmax(logits)."""
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or logits.shape[0] != labels.shape[0]:
        raise DimensionError.mismatch("cross_entropy", logits.shape, labels.shape)
    logp = log_softmax(logits, axis=-1)
    picked = getitem(logp, (np.arange(labels.shape[0]), labels))
    return neg(mean(picked))


def mse(prediction: Tensor, target) -> Tensor:
    diff = sub(prediction, target)
    return mean(mul(diff, diff))
