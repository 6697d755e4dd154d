"""Reader / writer for the TU benchmark text format.

A dataset ``NAME`` lives in one directory as::

    NAME_A.txt                 "i, j" per line, 1-based, both directions listed
    NAME_graph_indicator.txt   1-based graph id of every node
    NAME_graph_labels.txt      one integer class per graph
    NAME_node_labels.txt       one integer per node (optional)

Graph and node labels are remapped to ``0..C-1`` through their sorted unique
values, so MUTAG's ``-1/1`` classes become ``0/1``.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Optional

import numpy as np
from loguru import logger

from gmtpool.errors import LoadError
from gmtpool.graphs.graph import Dataset, Graph, canonical_edges


def _read_int_rows(path: Path, width: int) -> np.ndarray:
    """Parse *path* into an ``(lines, width)`` int64 array; blank lines are skipped."""
    if not path.is_file():
        raise LoadError("missing file", file=str(path))
    rows: List[List[int]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            tokens = [tok.strip() for tok in line.split(",")]
            if len(tokens) != width:
                raise LoadError(f"expected {width} value(s), found {len(tokens)}", file=str(path), line=lineno)
            try:
                rows.append([int(tok) for tok in tokens])
            except ValueError:
                raise LoadError(f"non-integer token in {line!r}", file=str(path), line=lineno) from None
    return np.asarray(rows, dtype=np.int64).reshape(-1, width)


def _remap(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map arbitrary integer labels onto ``0..C-1`` via their sorted unique values."""
    table, inverse = np.unique(values, return_inverse=True)
    return inverse.astype(np.int64).reshape(values.shape), table


def load_tu_dataset(directory: str | Path, name: str, *, degree_cap: Optional[int] = None) -> Dataset:
    """Load ``name`` from *directory*.

    Node features are one-hot node labels when ``NAME_node_labels.txt`` exists,
    otherwise one-hot node degree clamped to *degree_cap* (default: the largest
    degree in the file).
    """
    root = Path(directory)
    if not root.is_dir():
        raise LoadError("dataset directory not found", file=str(root))

    indicator_path = root / f"{name}_graph_indicator.txt"
    indicator = _read_int_rows(indicator_path, 1)[:, 0]
    if indicator.size == 0:
        raise LoadError("graph indicator is empty", file=str(indicator_path))
    if indicator.min() < 1 or np.any(np.diff(indicator) < 0):
        bad = int(np.argmax(np.diff(indicator) < 0)) + 2 if np.any(np.diff(indicator) < 0) else 1
        raise LoadError("graph ids must be 1-based and non-decreasing", file=str(indicator_path), line=bad)
    graph_of_node = indicator - 1
    num_graphs = int(graph_of_node.max()) + 1
    counts = np.bincount(graph_of_node, minlength=num_graphs)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    num_nodes = int(indicator.size)

    labels_path = root / f"{name}_graph_labels.txt"
    raw_labels = _read_int_rows(labels_path, 1)[:, 0]
    if raw_labels.size != num_graphs:
        raise LoadError(
            f"{raw_labels.size} graph labels for {num_graphs} graphs", file=str(labels_path), line=raw_labels.size
        )
    graph_labels, label_table = _remap(raw_labels)

    adj_path = root / f"{name}_A.txt"
    pairs = _read_int_rows(adj_path, 2) - 1
    if pairs.size and (pairs.min() < 0 or pairs.max() >= num_nodes):
        bad = int(np.argmax((pairs < 0).any(axis=1) | (pairs >= num_nodes).any(axis=1))) + 1
        raise LoadError(f"node index outside [1, {num_nodes}]", file=str(adj_path), line=bad)
    owner = graph_of_node[pairs[:, 0]] if pairs.size else np.zeros(0, dtype=np.int64)
    if pairs.size and np.any(owner != graph_of_node[pairs[:, 1]]):
        bad = int(np.argmax(owner != graph_of_node[pairs[:, 1]])) + 1
        raise LoadError("edge crosses a graph boundary", file=str(adj_path), line=bad)

    node_labels: Optional[np.ndarray] = None
    node_table: Optional[np.ndarray] = None
    node_label_path = root / f"{name}_node_labels.txt"
    if node_label_path.exists():
        raw_node_labels = _read_int_rows(node_label_path, 1)[:, 0]
        if raw_node_labels.size != num_nodes:
            raise LoadError(
                f"{raw_node_labels.size} node labels for {num_nodes} nodes",
                file=str(node_label_path),
                line=raw_node_labels.size,
            )
        node_labels, node_table = _remap(raw_node_labels)
        logger.debug("{}: {} node label values {}", name, node_table.size, node_table.tolist())

    order = np.argsort(owner, kind="stable")
    edge_bounds = np.searchsorted(owner[order], np.arange(num_graphs + 1))
    structures = []
    for gid in range(num_graphs):
        local = pairs[order[edge_bounds[gid] : edge_bounds[gid + 1]]] - offsets[gid]
        structures.append(canonical_edges(local, int(counts[gid])))

    if node_labels is not None:
        width = int(node_labels.max()) + 1
        eye = np.eye(width)
        graphs = [
            Graph(
                node_features=eye[node_labels[offsets[g] : offsets[g] + counts[g]]],
                edges=structures[g],
                label=int(graph_labels[g]),
                node_labels=node_labels[offsets[g] : offsets[g] + counts[g]].copy(),
            )
            for g in range(num_graphs)
        ]
        dataset = Dataset(
            graphs,
            int(label_table.size),
            width,
            name=name,
            feature_source="node_labels",
            label_values=label_table,
            node_label_values=node_table,
        )
    else:
        placeholder = [
            Graph(node_features=np.zeros((int(counts[g]), 1)), edges=structures[g], label=int(graph_labels[g]))
            for g in range(num_graphs)
        ]
        dataset = Dataset(placeholder, int(label_table.size), 1, name=name, feature_source="placeholder", label_values=label_table)
        cap = degree_cap if degree_cap is not None else max_degree(dataset.graphs)
        dataset = dataset.with_degree_features(cap)

    logger.info(
        "Loaded {}: {} graphs, {} classes, {} features, mean nodes {:.2f}",
        name,
        len(dataset),
        dataset.num_classes,
        dataset.num_features,
        float(counts.mean()),
    )
    return dataset


def max_degree(graphs: List[Graph]) -> int:
    return max((int(g.degrees().max()) if g.n else 0 for g in graphs), default=0)


def save_tu_dataset(dataset: Dataset, directory: str | Path, name: Optional[str] = None) -> Path:
    """Write *dataset* in TU format; :func:`load_tu_dataset` reads it back unchanged.

    Graph and node labels go through ``label_values`` / ``node_label_values``
    when the dataset carries them, so a loaded dataset is written back with
    the raw label integers of its source files.
    """
    name = name or dataset.name
    graph_values = dataset.label_values
    node_values = dataset.node_label_values
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)

    adj_lines: List[str] = []
    indicator_lines: List[str] = []
    node_label_lines: List[str] = []
    offset = 0
    for gid, graph in enumerate(dataset.graphs, start=1):
        for i, j in graph.edges + offset + 1:
            adj_lines.append(f"{i}, {j}")
            adj_lines.append(f"{j}, {i}")
        indicator_lines.extend([str(gid)] * graph.n)
        if graph.node_labels is not None:
            raw = graph.node_labels if node_values is None else node_values[graph.node_labels]
            node_label_lines.extend(str(int(v)) for v in raw)
        offset += graph.n

    (root / f"{name}_A.txt").write_text("\n".join(adj_lines) + ("\n" if adj_lines else ""), encoding="utf-8")
    (root / f"{name}_graph_indicator.txt").write_text("\n".join(indicator_lines) + "\n", encoding="utf-8")
    (root / f"{name}_graph_labels.txt").write_text(
        "\n".join(_raw_label(g.label, graph_values) for g in dataset.graphs) + "\n", encoding="utf-8"
    )
    if dataset.feature_source == "node_labels" and len(node_label_lines) == offset:
        (root / f"{name}_node_labels.txt").write_text("\n".join(node_label_lines) + "\n", encoding="utf-8")
    logger.debug("Wrote {} graphs to {}", len(dataset), root)
    return root


def _raw_label(label: Optional[int], values: Optional[np.ndarray]) -> str:
    label = label or 0
    return str(int(label if values is None else values[label]))
