"""Synthetic graph generators: ring, grid and Erdős–Rényi G(n, m)."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from gmtpool.errors import ParameterError
from gmtpool.graphs.graph import Graph


def gen_ring(n: int) -> Graph:
    """``n`` nodes on the unit circle, node ``i`` at angle ``2πi/n``, edges ``(i, i+1 mod n)``."""
    if n < 3:
        raise ParameterError(f"ring needs n >= 3, got {n}", data={"n": n})
    theta = 2.0 * np.pi * np.arange(n) / n
    coords = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    # cos/sin of exact quarter turns leave ~1e-16 residue
    coords[np.abs(coords) < 1e-15] = 0.0
    src = np.arange(n)
    edges = np.stack([src, (src + 1) % n], axis=1)
    return Graph(node_features=coords.copy(), edges=edges, coords=coords)


def gen_grid(rows: int, cols: int) -> Graph:
    """Lattice with 4-neighbour edges, positions scaled into ``[0, 1]²``; node id ``r * cols + c``."""
    if rows < 2 or cols < 2:
        raise ParameterError(f"grid needs rows, cols >= 2, got {rows}x{cols}", data={"rows": rows, "cols": cols})
    r, c = np.divmod(np.arange(rows * cols), cols)
    coords = np.stack([c / (cols - 1), r / (rows - 1)], axis=1).astype(np.float64)
    ids = np.arange(rows * cols).reshape(rows, cols)
    horizontal = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    vertical = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    return Graph(node_features=coords.copy(), edges=np.concatenate([horizontal, vertical]), coords=coords)


def _pair_from_index(k: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Decode linear indices over the upper triangle (row-major, ``i < j``) into pairs."""
    rows = np.arange(n, dtype=np.int64)
    starts = rows * n - rows * (rows + 1) // 2
    i = np.searchsorted(starts, k, side="right") - 1
    j = k - starts[i] + i + 1
    return i, j


def gen_erdos_renyi(n: int, m: int, seed: Optional[int] = 0) -> Graph:
    """``m`` distinct undirected edges drawn uniformly without replacement; features are constant 1.0."""
    if n < 1:
        raise ParameterError(f"Erdős–Rényi graph needs n >= 1, got {n}", data={"n": n})
    total = n * (n - 1) // 2
    if not 0 <= m <= total:
        raise ParameterError(f"cannot place {m} edges on {n} nodes (max {total})", data={"n": n, "m": m})
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(total, size=m, replace=False)).astype(np.int64) if m else np.zeros(0, np.int64)
    i, j = _pair_from_index(picked, n)
    return Graph(node_features=np.ones((n, 1)), edges=np.stack([i, j], axis=1))


def export_csv(graph: Graph, directory: str | Path, stem: str = "graph") -> Tuple[Path, Path]:
    """Write ``<stem>_nodes.csv`` (``node_id,x,y``) and ``<stem>_edges.csv`` (``src,dst``)."""
    if graph.coords is None:
        raise ParameterError("graph has no coordinates to export")
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    nodes_path = root / f"{stem}_nodes.csv"
    edges_path = root / f"{stem}_edges.csv"
    with nodes_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "x", "y"])
        for i, (x, y) in enumerate(graph.coords):
            writer.writerow([i, repr(float(x)), repr(float(y))])
    with edges_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst"])
        writer.writerows(graph.edges.tolist())
    return nodes_path, edges_path
