"""Command-line entry point: ``classify``, ``reconstruct``, ``bench-memory``, ``bench-time``.

Every command accepts ``--config PATH`` (flat ``key=value`` file), ``--seed``
and ``--out``; flags override file keys.  Exit status is 0 on success, 2 for
usage/config errors and 1 for any other :class:`~gmtpool.errors.GmtError`.
"""

from __future__ import annotations

import argparse
import multiprocessing
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar

from loguru import logger

from gmtpool.bench import BenchRecord, bench_memory, bench_time, growth_ratios
from gmtpool.config import RunConfig
from gmtpool.errors import ConfigError, GmtError, LoadError, UsageError
from gmtpool.graphs.splits import stratified_kfold
from gmtpool.graphs.tu import load_tu_dataset
from gmtpool.logging import setup_logger
from gmtpool.report import (
    cluster_svg,
    overlay_svg,
    write_assignment,
    write_bench,
    write_coordinates,
    write_cross_objective,
    write_folds,
    write_history,
    write_run_record,
    write_summary,
)
from gmtpool.settings import settings
from gmtpool.tasks.classify import FoldResult, run_fold, summarise
from gmtpool.tasks.reconstruct import ReconResult, build_graph, cross_objective, run_reconstruction

T = TypeVar("T")
R = TypeVar("R")

# ---------------------------------------------------------------------------
# Parallel map
# ---------------------------------------------------------------------------


def _worker_init() -> None:
    setup_logger(to_file=False)


def parallel_map(fn: Callable[[T], R], items: Sequence[T], jobs: int) -> List[R]:
    """``[fn(x) for x in items]``, spread over *jobs* spawned processes when ``jobs > 1``.

    Results keep the order of *items*, so outputs do not depend on *jobs*.
    """
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=min(jobs, len(items)), mp_context=ctx, initializer=_worker_init) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------


def resolve_dataset_dir(root: Path, name: str) -> Path:
    """``root/name``, matching the folder name case-insensitively (``mutag`` → ``MUTAG``)."""
    exact = root / name
    if exact.is_dir():
        return exact
    if root.is_dir():
        for child in sorted(root.iterdir()):
            if child.is_dir() and child.name.lower() == name.lower():
                return child
    raise LoadError(f"dataset {name!r} not found", file=str(exact))


def _fold_job(job: tuple) -> FoldResult:
    dataset, split, config, seed, fold = job
    return run_fold(dataset, split, config, seed, fold)


def cmd_classify(config: RunConfig, out: Path) -> List[Path]:
    root = Path(config.data_dir or settings.DATA_DIR)
    directory = resolve_dataset_dir(root, config.dataset)
    dataset = load_tu_dataset(directory, directory.name, degree_cap=config.degree_cap)

    jobs = []
    for seed in config.seed_list:
        for fold, split in enumerate(stratified_kfold(dataset, config.folds, seed, val_fraction=config.val_fraction)):
            jobs.append((dataset, split, config, seed, fold))
    logger.info("classify {} with {}: {} seed(s) x {} folds, {} job(s)", dataset.name, config.pool, config.seeds, config.folds, config.jobs)
    results = parallel_map(_fold_job, jobs, config.jobs)

    summary = summarise(results)
    written = [
        write_folds(out / "folds.csv", results),
        write_summary(out / "summary.csv", summary, dataset=dataset.name, pool=config.pool),
    ]
    for r in results:
        written.append(write_history(out / "history" / f"seed{r.seed}_fold{r.fold}.csv", r.history))
    print(
        f"{dataset.name} {config.pool}: test acc {summary['test_acc_mean']:.4f} ± {summary['test_acc_std']:.4f} "
        f"(val {summary['val_acc_mean']:.4f} ± {summary['val_acc_std']:.4f}) over {int(summary['runs'])} run(s)"
    )
    return written


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------


def _write_reconstruction(result: ReconResult, graph, out: Path, config: RunConfig) -> List[Path]:
    errors = result.errors
    a_text = "n/a" if errors.a_mse is None else f"{errors.a_mse:.3e}"
    written = [
        write_coordinates(out / "coordinates.csv", graph.node_features, result.reconstruction),
        write_history(out / "history.csv", result.history),
    ]
    svg = overlay_svg(
        graph.node_features,
        result.reconstruction,
        graph.edges,
        title=f"{config.graph} / {config.pool} / {result.objective}-objective",
        caption=f"x_error {errors.x_mse:.3e}   a_error {a_text}",
    )
    overlay = out / "overlay.svg"
    overlay.write_text(svg, encoding="utf-8")
    written.append(overlay)
    if result.assignment is not None:
        if not result.assignment.is_valid():
            logger.warning("Assignment matrix of {} is not row-stochastic", config.pool)
        written.append(write_assignment(out / "assignment.csv", result.assignment.values))
        clusters = out / "clusters.svg"
        clusters.write_text(
            cluster_svg(
                graph.node_features,
                graph.edges,
                result.assignment.hard_labels(),
                result.assignment.k,
                title=f"{config.graph} / {config.pool} clusters (k={result.assignment.k})",
            ),
            encoding="utf-8",
        )
        written.append(clusters)
    print(f"[{result.objective}-objective] x_error={errors.x_mse:.6e} a_error={a_text}")
    return written


def _recon_job(job: tuple) -> ReconResult:
    config, objective, graph = job
    return run_reconstruction(config, objective=objective, graph=graph)


def cmd_reconstruct(config: RunConfig, out: Path) -> List[Path]:
    graph = build_graph(config)
    if config.objective != "both":
        return _write_reconstruction(run_reconstruction(config, graph=graph), graph, out, config)

    if config.jobs > 1:
        pairs = parallel_map(_recon_job, [(config, obj, graph) for obj in ("x", "a")], config.jobs)
        results = dict(zip(("x", "a"), pairs))
    else:
        results = cross_objective(config, graph)
    written: List[Path] = []
    for objective, result in results.items():
        written.extend(_write_reconstruction(result, graph, out / objective, config))
    written.append(write_cross_objective(out / "cross_objective.csv", {obj: r.errors for obj, r in results.items()}))
    return written


# ---------------------------------------------------------------------------
# benchmarks
# ---------------------------------------------------------------------------


def _bench_job(job: tuple) -> List[BenchRecord]:
    fn, config = job
    return fn(config)


def _run_bench(fn: Callable[[RunConfig], List[BenchRecord]], config: RunConfig, out: Path, filename: str) -> List[Path]:
    points = [(fn, config.model_copy(update={"sweep": [n]})) for n in config.sweep]
    records = [r for chunk in parallel_map(_bench_job, points, config.jobs) for r in chunk]
    for method in config.methods:
        ratios = growth_ratios(records, method)
        if ratios:
            logger.info("{} peak-scalar growth per sweep step: {}", method, ", ".join(f"{r:.2f}" for r in ratios))
    for r in records:
        print(f"{r.method:>10} n={r.n:<6} m={r.m:<8} peak={r.peak_scalars:<12} {r.wall_ms:10.2f} ms")
    return [write_bench(out / filename, records)]


def cmd_bench_memory(config: RunConfig, out: Path) -> List[Path]:
    return _run_bench(bench_memory, config, out, "bench_memory.csv")


def cmd_bench_time(config: RunConfig, out: Path) -> List[Path]:
    return _run_bench(bench_time, config, out, "bench_time.csv")


COMMANDS: Dict[str, Callable[[RunConfig, Path], List[Path]]] = {
    "classify": cmd_classify,
    "reconstruct": cmd_reconstruct,
    "bench-memory": cmd_bench_memory,
    "bench-time": cmd_bench_time,
}

# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value config file; flags override its keys")
    p.add_argument("--seed", type=int, help="Base seed (default: GMT_DEFAULT_SEED)")
    p.add_argument("--out", help="Run output directory")
    p.add_argument("--jobs", type=int, help="Worker processes")
    p.add_argument("--log-level", dest="log_level", help="Override GMT_LOG_LEVEL")


def _model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pool", help="READOUT / pooling method")
    p.add_argument("--ratio", type=float, help="Pooling ratio in (0, 1]")
    p.add_argument("--hidden", type=int)
    p.add_argument("--heads", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    p.add_argument("--decoupled-weight-decay", dest="decoupled_weight_decay", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--scale-attention", dest="scale_attention", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmtpool", description="Graph multiset pooling experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="k-fold graph classification on a TU dataset")
    _common(p)
    _model(p)
    p.add_argument("--dataset")
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--degree-cap", dest="degree_cap", type=int)
    p.add_argument("--seeds", type=int, help="Number of consecutive seeds")
    p.add_argument("--folds", type=int)
    p.add_argument("--val-fraction", dest="val_fraction", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--attention-dropout", dest="attention_dropout", type=float)
    p.add_argument("--num-layers", dest="num_layers", type=int)
    p.add_argument("--jk", choices=["concat", "last"])
    p.add_argument("--gcn-bias", dest="gcn_bias", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--message-passing", dest="message_passing", action=argparse.BooleanOptionalAction, default=None)

    p = sub.add_parser("reconstruct", help="Autoencode a synthetic ring/grid through one pooling layer")
    _common(p)
    _model(p)
    p.add_argument("--graph", choices=["ring", "grid"])
    p.add_argument("--n", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--objective", choices=["x", "a", "both"])
    p.add_argument("--assignment-mode", dest="assignment_mode", choices=["query", "key"])

    for name, text in (("bench-memory", "Peak live scalars per forward"), ("bench-time", "Median forward wall time")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--sweep", help="Comma-separated node counts")
        p.add_argument("--methods", help="Comma-separated READOUT names")
        p.add_argument("--hidden", type=int)
        p.add_argument("--heads", type=int)
        p.add_argument("--ratio", type=float)
        p.add_argument("--bench-k", dest="bench_k", type=int)
        p.add_argument("--bench-batch", dest="bench_batch", type=int)
        p.add_argument("--repeats", type=int)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    text = ""
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}", field="config") from None
    overrides: Dict[str, Any] = {
        key: value for key, value in vars(args).items() if key in RunConfig.model_fields and value is not None
    }
    overrides["task"] = args.command
    return RunConfig.from_text(text, **overrides)


def default_out(config: RunConfig) -> Path:
    label = config.pool if config.task in ("classify", "reconstruct") else "-".join(config.methods)
    return Path(settings.OUTPUT_DIR) / f"{config.task}_{label}_seed{config.seed}"


def main(argv: Optional[Iterable[str]] = None) -> int:
    args = build_parser().parse_args(None if argv is None else list(argv))
    setup_logger(args.log_level.upper() if args.log_level else None)
    try:
        config = load_config(args)
        out = Path(config.out) if config.out else default_out(config)
        written = COMMANDS[config.task](config, out)
        write_run_record(out, config, written)
    except UsageError as exc:
        logger.error("{}", exc.to_dict())
        return 2
    except GmtError as exc:
        logger.error("{}", exc.to_dict())
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
