"""Deterministic scalar-allocation accounting for tensors.

Every :class:`~gmtpool.autodiff.tensor.Tensor` created while a counter is
active adds its scalar payload (``data.size``) to the counter and schedules a
``weakref.finalize`` hook that subtracts it again when the tensor is collected.
CPython frees objects as soon as their refcount drops to zero, so the live
count tracks the forward pass exactly and ``peak`` is reproducible run to run,
unlike allocator-level measurements.

Usage::

    with count_allocations() as counter:
        with no_grad():
            model(batch)
    counter.peak  # largest number of simultaneously live scalars
"""

from __future__ import annotations

import weakref
from contextlib import contextmanager
from typing import Iterator, List


class AllocationCounter:
    """Live / peak scalar counts for tensors allocated inside one window."""

    __slots__ = ("live", "peak", "allocations", "__weakref__")

    def __init__(self) -> None:
        self.live = 0
        self.peak = 0
        self.allocations = 0

    def _add(self, size: int) -> None:
        self.live += size
        self.allocations += 1
        if self.live > self.peak:
            self.peak = self.live

    def _release(self, size: int) -> None:
        self.live -= size

    def __repr__(self) -> str:
        return f"AllocationCounter(live={self.live}, peak={self.peak}, allocations={self.allocations})"


# Internal state: stack of active counters (nested windows all see allocations)
_active: List[AllocationCounter] = []


def _release_all(size: int, counters: tuple) -> None:
    for counter in counters:
        counter._release(size)


def on_alloc(tensor) -> None:
    """Record *tensor* with every active counter; no-op when none is active."""
    if not _active:
        return
    size = int(tensor.data.size)
    counters = tuple(_active)
    for counter in counters:
        counter._add(size)
    weakref.finalize(tensor, _release_all, size, counters)


def is_counting() -> bool:
    return bool(_active)


@contextmanager
def count_allocations() -> Iterator[AllocationCounter]:
    """Activate a fresh counter for the duration of the ``with`` block."""
    counter = AllocationCounter()
    _active.append(counter)
    try:
        yield counter
    finally:
        _active.remove(counter)
