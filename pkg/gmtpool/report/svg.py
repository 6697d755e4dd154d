"""Pixel geometry for the overlay and cluster drawings."""

from __future__ import annotations

from typing import Dict, List, Optional

import numpy as np

WIDTH = 480
HEIGHT = 480
MARGIN = 40


def _xy(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] == 0:
        return np.zeros((len(points), 2))
    if points.shape[1] == 1:
        return np.column_stack([points[:, 0], np.zeros(len(points))])
    return points[:, :2]


class _Frame:
    """Maps data coordinates into the drawable area, y pointing up."""

    def __init__(self, *point_sets: np.ndarray, width: int = WIDTH, height: int = HEIGHT, margin: int = MARGIN) -> None:
        stacked = np.vstack([p for p in point_sets if len(p)]) if any(len(p) for p in point_sets) else np.zeros((1, 2))
        self.lo = stacked.min(axis=0)
        span = stacked.max(axis=0) - self.lo
        self.span = float(max(span.max(), 1e-12))
        self.width, self.height, self.margin = width, height, margin
        self.side = min(width, height) - 2 * margin

    def __call__(self, p: np.ndarray) -> tuple[float, float]:
        u = (p - self.lo) / self.span
        return self.margin + float(u[0]) * self.side, self.height - self.margin - float(u[1]) * self.side


def hue(i: int, n: int) -> str:
    return f"hsl({360.0 * i / max(n, 1):.1f}, 70%, 45%)"


def _segments(frame: _Frame, xy: np.ndarray, edges: np.ndarray) -> List[Dict[str, float]]:
    segments = []
    for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
        (x1, y1), (x2, y2) = frame(xy[u]), frame(xy[v])
        segments.append({"x1": x1, "y1": y1, "x2": x2, "y2": y2})
    return segments


def overlay_svg(
    x_true: np.ndarray, x_rec: np.ndarray, edges: np.ndarray, *, title: str, caption: Optional[str] = None
) -> str:
    """Original coordinates in gray, reconstruction on top colored by node index."""
    from gmtpool.report import render_template

    truth, recon = _xy(x_true), _xy(x_rec)
    frame = _Frame(truth, recon)
    n = len(truth)
    arguments = {
        "title": title,
        "width": frame.width,
        "height": frame.height,
        "edges": _segments(frame, truth, edges),
        "truth": [dict(zip("xy", frame(p))) for p in truth],
        "recon": [{**dict(zip("xy", frame(p))), "color": hue(i, n)} for i, p in enumerate(recon)],
    }
    if caption:
        arguments["caption"] = caption
    return render_template("overlay", arguments)


def cluster_svg(coords: np.ndarray, edges: np.ndarray, hard_labels: np.ndarray, k: int, *, title: str) -> str:
    """Nodes at their true coordinates, colored by arg-max cluster."""
    from gmtpool.report import render_template

    xy = _xy(coords)
    frame = _Frame(xy)
    nodes = [
        {**dict(zip("xy", frame(p))), "color": hue(int(c), k), "cluster": int(c)}
        for p, c in zip(xy, np.asarray(hard_labels))
    ]
    return render_template(
        "clusters",
        {"title": title, "width": frame.width, "height": frame.height, "edges": _segments(frame, xy, edges), "nodes": nodes},
    )
