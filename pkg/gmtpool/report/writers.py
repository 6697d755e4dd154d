from __future__ import annotations

"""CSV writers and the ``run.json`` provenance record.

Numbers are written with ``repr`` precision so two runs from the same
(config, seed) produce byte-identical files apart from wall-clock columns.
"""

import csv
import subprocess
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from gmtpool.settings import settings

HISTORY_FIELDS = ["epoch", "train_loss", "val_loss", "val_acc"]
FOLD_FIELDS = ["seed", "fold", "test_acc", "val_acc", "val_loss", "best_epoch", "epochs"]
SUMMARY_FIELDS = ["dataset", "pool", "runs", "folds", "test_acc_mean", "test_acc_std", "val_acc_mean", "val_acc_std"]
COORD_FIELDS = ["node_id", "x_true", "y_true", "x_rec", "y_rec"]
BENCH_FIELDS = ["n", "m", "method", "peak_scalars", "wall_ms"]
CROSS_FIELDS = ["trained_on", "x_mse", "a_mse", "x_fro", "a_fro"]


def write_csv(path: str | Path, fieldnames: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(fieldnames), extrasaction="ignore", restval="", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    logger.debug("Wrote {}", path)
    return path


def write_history(path: str | Path, history: Sequence[Mapping[str, Any]]) -> Path:
    """Per-epoch metrics; reconstruction runs leave the validation columns empty."""
    return write_csv(path, HISTORY_FIELDS, history)


def write_folds(path: str | Path, results: Sequence[Any]) -> Path:
    return write_csv(path, FOLD_FIELDS, ({name: getattr(r, name) for name in FOLD_FIELDS} for r in results))


def write_summary(path: str | Path, summary: Mapping[str, float], *, dataset: str, pool: str) -> Path:
    row = dict(summary)
    row["runs"] = int(row["runs"])
    row["folds"] = int(row["folds"])
    return write_csv(path, SUMMARY_FIELDS, [{"dataset": dataset, "pool": pool, **row}])


def write_coordinates(path: str | Path, x_true: np.ndarray, x_rec: np.ndarray) -> Path:
    x_true = np.asarray(x_true, dtype=np.float64)
    x_rec = np.asarray(x_rec, dtype=np.float64)

    def col(x: np.ndarray, j: int) -> np.ndarray:
        return x[:, j] if x.shape[1] > j else np.zeros(len(x))

    rows = (
        {"node_id": i, "x_true": float(a), "y_true": float(b), "x_rec": float(c), "y_rec": float(d)}
        for i, (a, b, c, d) in enumerate(zip(col(x_true, 0), col(x_true, 1), col(x_rec, 0), col(x_rec, 1)))
    )
    return write_csv(path, COORD_FIELDS, rows)


def write_assignment(path: str | Path, assignment: np.ndarray) -> Path:
    """``node_id, cluster_0 … cluster_{k-1}``."""
    c = np.asarray(assignment, dtype=np.float64)
    fields = ["node_id"] + [f"cluster_{j}" for j in range(c.shape[1])]
    rows = ({"node_id": i, **{f"cluster_{j}": float(v) for j, v in enumerate(row)}} for i, row in enumerate(c))
    return write_csv(path, fields, rows)


def write_bench(path: str | Path, records: Sequence[BaseModel]) -> Path:
    return write_csv(path, BENCH_FIELDS, (r.model_dump() for r in records))


def write_cross_objective(path: str | Path, errors: Mapping[str, Any]) -> Path:
    """One row per training objective with both error metrics."""
    rows = [
        {"trained_on": objective, "x_mse": e.x_mse, "a_mse": e.a_mse, "x_fro": e.x_fro, "a_fro": e.a_fro}
        for objective, e in errors.items()
    ]
    return write_csv(path, CROSS_FIELDS, rows)


# ---------------------------------------------------------------------------
# Provenance
# ---------------------------------------------------------------------------


def git_describe(cwd: Optional[Path] = None) -> str:
    """``GMT_GIT_DESCRIBE`` if set, else ``git describe --always --dirty``, else ``"unknown"``."""
    if settings.GIT_DESCRIBE:
        return settings.GIT_DESCRIBE
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=cwd or Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def _package_version() -> str:
    try:
        return version("gmtpool")
    except PackageNotFoundError:
        return "0+local"


class RunRecord(BaseModel):
    """What is needed to reproduce a run directory: the config, the seed and the code revision."""

    task: str
    seed: int
    config: Dict[str, Any]
    git_describe: str = Field(default_factory=git_describe)
    package_version: str = Field(default_factory=_package_version)
    created_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    outputs: List[str] = Field(default_factory=list)


def write_run_record(directory: str | Path, config: Any, outputs: Sequence[Path] = ()) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    record = RunRecord(
        task=config.task,
        seed=config.seed,
        config=config.model_dump(),
        outputs=sorted(str(Path(p).relative_to(directory)) if Path(p).is_relative_to(directory) else str(p) for p in outputs),
    )
    path = directory / "run.json"
    path.write_text(record.model_dump_json(indent=2) + "\n", encoding="utf-8")
    (directory / "config.txt").write_text(config.to_text(), encoding="utf-8")
    logger.info("Run record written to {}", path)
    return path
