"""Central finite-difference gradient checking.

``check_gradients(loss_fn, params)`` compares the analytic gradient of a
scalar ``loss_fn()`` against ``(f(x + h) - f(x - h)) / 2h`` for every entry
of every parameter and returns the relative error per parameter name.
"""

from __future__ import annotations

from typing import Callable, Dict, Sequence

import numpy as np

from gmtpool.autodiff.tensor import Parameter, Tensor, backward, no_grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-10) -> float:
    diff = np.linalg.norm(analytic - numeric)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), floor)
    return float(diff / scale)


def numeric_gradient(loss_fn: Callable[[], Tensor], param: Parameter, h: float = 1e-5) -> np.ndarray:
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    out = grad.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn().item()
            flat[i] = orig - h
            down = loss_fn().item()
            flat[i] = orig
            out[i] = (up - down) / (2.0 * h)
    return grad


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    h: float = 1e-5,
) -> Dict[str, float]:
    """Return ``{parameter name: relative error}`` for analytic vs numeric gradients."""
    for p in params:
        p.zero_grad()
    backward(loss_fn(), params)
    errors: Dict[str, float] = {}
    for i, p in enumerate(params):
        errors[p.name or f"param{i}"] = relative_error(p.grad, numeric_gradient(loss_fn, p, h))
    return errors
