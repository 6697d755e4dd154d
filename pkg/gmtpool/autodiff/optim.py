"""Adam optimizer over :class:`~gmtpool.autodiff.tensor.Parameter` objects."""

from __future__ import annotations

from typing import Iterable, List, Tuple

import numpy as np

from gmtpool.autodiff.tensor import AdamState, Parameter
from gmtpool.errors import ParameterError, UsageError


def adam_step(
    params: Iterable[Parameter],
    lr: float,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
    weight_decay: float = 0.0,
    *,
    decoupled: bool = False,
) -> None:
    """Apply one Adam update in place.

    Weight decay is added to the gradient as an L2 term (classic Adam) unless
    *decoupled* is set, in which case parameters shrink by ``lr * weight_decay``
    directly (AdamW).  Parameters without a gradient while others have one
    were unreachable from the loss and are treated as zero-gradient.
    """
    params = list(params)
    if params and all(p.grad is None for p in params):
        raise UsageError("adam_step called before backward(): no parameter has a gradient")
    beta1, beta2 = betas
    for p in params:
        grad = p.grad if p.grad is not None else np.zeros_like(p.data)
        if p.adam_state is None:
            p.adam_state = AdamState.zeros_like(p.data)
        state = p.adam_state
        if weight_decay and not decoupled:
            grad = grad + weight_decay * p.data
        state.step += 1
        state.m = beta1 * state.m + (1.0 - beta1) * grad
        state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
        m_hat = state.m / (1.0 - beta1**state.step)
        v_hat = state.v / (1.0 - beta2**state.step)
        update = lr * m_hat / (np.sqrt(v_hat) + eps)
        if weight_decay and decoupled:
            update = update + lr * weight_decay * p.data
        p.assign(p.data - update)


class Adam:
    """Stateful wrapper: holds the parameter list and hyperparameters."""

    def __init__(
        self,
        params: Iterable[Parameter],
        lr: float = 1e-3,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
        *,
        decoupled: bool = False,
    ) -> None:
        if lr <= 0:
            raise ParameterError(f"learning rate must be positive, got {lr}")
        self.params: List[Parameter] = list(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.decoupled = decoupled

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        adam_step(self.params, self.lr, self.betas, self.eps, self.weight_decay, decoupled=self.decoupled)
