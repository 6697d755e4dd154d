"""Memory and time benchmarks of READOUT forward passes on Erdős–Rényi graphs.

Memory is the peak number of simultaneously live float64 scalars held by
tensors created during the forward pass (see :mod:`gmtpool.autodiff.memory`),
which is deterministic; time is wall clock and is not.
"""

from __future__ import annotations

import statistics
import time
from typing import Iterable, List

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from gmtpool.autodiff.memory import count_allocations
from gmtpool.autodiff.tensor import Tensor, no_grad
from gmtpool.config import RunConfig
from gmtpool.errors import UsageError
from gmtpool.graphs.graph import Graph, GraphBatch, make_batch
from gmtpool.graphs.synthetic import gen_erdos_renyi
from gmtpool.pooling.registry import ReadoutSpec, build_readout


class BenchRecord(BaseModel):
    n: int = Field(..., ge=0, description="Nodes per graph")
    m: int = Field(..., ge=0, description="Undirected edges per graph")
    method: str
    peak_scalars: int = Field(..., ge=0, description="Peak live float64 values during the forward pass")
    wall_ms: float = Field(..., ge=0.0, description="Forward duration in milliseconds")

    @model_validator(mode="after")
    def _non_empty_peak(self):  # noqa: D401 – pydantic hook
        if self.n > 0 and self.peak_scalars <= 0:
            raise ValueError("peak_scalars must be positive for a non-empty graph")
        return self


def _check_sweep(sweep: Iterable[int]) -> List[int]:
    sweep = list(sweep)
    if not sweep or any(n <= 0 for n in sweep):
        raise UsageError(f"node-count sweep must contain positive sizes, got {sweep}", data={"sweep": sweep})
    return sweep


def _with_features(graph: Graph, dim: int, rng: np.random.Generator) -> Graph:
    return Graph(node_features=rng.standard_normal((graph.n, dim)), edges=graph.edges)


def _forward(readout, features: Tensor, layout: GraphBatch) -> Tensor:
    with no_grad():
        return readout(features, layout)


def measure_peak(readout, layout: GraphBatch) -> tuple[int, float]:
    """``(peak_scalars, wall_ms)`` of one counted forward pass."""
    features = Tensor(layout.node_features)
    readout.eval()
    with count_allocations() as counter:
        start = time.perf_counter()
        out = _forward(readout, features, layout)
        elapsed = (time.perf_counter() - start) * 1e3
        del out
    return counter.peak, elapsed


def bench_memory(config: RunConfig) -> List[BenchRecord]:
    """One Erdős–Rényi graph per size with ``m = 2n``; peak scalars per method."""
    records: List[BenchRecord] = []
    for n in _check_sweep(config.sweep):
        m = min(2 * n, n * (n - 1) // 2)
        rng = np.random.default_rng([config.seed, n])
        layout = make_batch([_with_features(gen_erdos_renyi(n, m, seed=config.seed), config.hidden, rng)])
        for method in config.methods:
            readout = build_readout(method, config.hidden, _spec(config, rng))
            peak, wall = measure_peak(readout, layout)
            record = BenchRecord(n=n, m=m, method=method, peak_scalars=peak, wall_ms=wall)
            logger.info("bench-memory n={} m={} {}: peak {} scalars", n, m, method, peak)
            records.append(record)
    return records


def bench_time(config: RunConfig) -> List[BenchRecord]:
    """``bench_batch`` graphs with ``m = n²/10`` in one batch; median of ``repeats`` timed forwards."""
    records: List[BenchRecord] = []
    for n in _check_sweep(config.sweep):
        m = min(n * n // 10, n * (n - 1) // 2)
        rng = np.random.default_rng([config.seed, n])
        graphs = [
            _with_features(gen_erdos_renyi(n, m, seed=config.seed + i), config.hidden, rng)
            for i in range(config.bench_batch)
        ]
        layout = make_batch(graphs)
        features = Tensor(layout.node_features)
        for method in config.methods:
            readout = build_readout(method, config.hidden, _spec(config, rng))
            readout.eval()
            peak, _ = measure_peak(readout, layout)
            _forward(readout, features, layout)  # warmup
            timings = []
            for _ in range(config.repeats):
                start = time.perf_counter()
                _forward(readout, features, layout)
                timings.append((time.perf_counter() - start) * 1e3)
            wall = statistics.median(timings)
            logger.info("bench-time n={} m={} {}: median {:.2f} ms over {} runs", n, m, method, wall, config.repeats)
            records.append(BenchRecord(n=n, m=m, method=method, peak_scalars=peak, wall_ms=wall))
    return records


def _spec(config: RunConfig, rng: np.random.Generator) -> ReadoutSpec:
    return ReadoutSpec(
        rng=rng,
        k=config.bench_k,
        ratio=config.ratio,
        heads=config.heads,
        scale=config.scale_attention,
        dropout=0.0,
    )


def growth_ratios(records: Iterable[BenchRecord], method: str, attr: str = "peak_scalars") -> List[float]:
    """Ratio of *attr* between consecutive sweep sizes for *method*."""
    rows = sorted((r for r in records if r.method == method), key=lambda r: r.n)
    values = [float(getattr(r, attr)) for r in rows]
    return [b / a for a, b in zip(values, values[1:])]
