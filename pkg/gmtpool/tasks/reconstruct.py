"""Graph reconstruction: autoencode node coordinates (or the adjacency) through one pool."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from loguru import logger

from gmtpool.autodiff import ops
from gmtpool.autodiff.optim import Adam
from gmtpool.autodiff.tensor import Tensor, backward, no_grad
from gmtpool.config import RunConfig
from gmtpool.errors import ConfigError, UnsupportedMetricError
from gmtpool.graphs.graph import Graph, GraphBatch, make_batch
from gmtpool.graphs.synthetic import gen_grid, gen_ring
from gmtpool.pooling.baselines import coarsen_adjacency
from gmtpool.pooling.gmpool import AssignmentMatrix
from gmtpool.tasks.classify import TrainState
from gmtpool.tasks.models import ReconModel, reconstructed_adjacency

LOG_EVERY = 100


@dataclass
class ReconErrors:
    """Per-entry mean squared errors plus the raw Frobenius norms."""

    x_mse: float
    x_fro: float
    a_mse: Optional[float] = None
    a_fro: Optional[float] = None


@dataclass
class ReconResult:
    model: ReconModel
    objective: str
    errors: ReconErrors
    state: TrainState
    reconstruction: np.ndarray
    assignment: Optional[AssignmentMatrix] = None
    history: List[Dict[str, float]] = field(default_factory=list)


def reconstruction_errors(
    x: np.ndarray,
    x_rec: np.ndarray,
    adjacency: Optional[np.ndarray] = None,
    assignment: Optional[np.ndarray] = None,
    edges: Optional[np.ndarray] = None,
) -> ReconErrors:
    """Compare ``X`` with ``X_rec`` and, given ``C``, ``A`` with ``C (Cᵀ A C) Cᵀ``."""
    diff = np.asarray(x, dtype=np.float64) - np.asarray(x_rec, dtype=np.float64)
    errors = ReconErrors(x_mse=float(np.mean(diff * diff)), x_fro=float(np.linalg.norm(diff)))
    if assignment is not None and adjacency is not None:
        c = np.asarray(assignment, dtype=np.float64)
        coarse = coarsen_adjacency(c, edges) if edges is not None else c.T @ adjacency @ c
        a_diff = adjacency - c @ coarse @ c.T
        errors.a_mse = float(np.mean(a_diff * a_diff))
        errors.a_fro = float(np.linalg.norm(a_diff))
    return errors


def _loss(
    model: ReconModel, layout: GraphBatch, graph: Graph, adjacency: np.ndarray, objective: str
) -> tuple[Tensor, Tensor, Optional[Tensor]]:
    out = model(layout)
    if objective == "x":
        return ops.mse(out.features, graph.node_features), out.features, out.assignment
    a_rec = reconstructed_adjacency(out.assignment, graph.edges)
    return ops.mse(a_rec, adjacency), out.features, out.assignment


def reconstruct_adjacency_error(model: ReconModel, graph: Graph) -> tuple[float, float]:
    """``(x_error, a_error)`` as per-entry MSE for a model exposing its assignment matrix."""
    model.eval()
    with no_grad():
        out = model(graph)
    if out.assignment is None:
        raise UnsupportedMetricError(f"pool {model.method!r} has no assignment matrix", data={"pool": model.method})
    errors = reconstruction_errors(
        graph.node_features, out.features.data, graph.dense_adjacency(), out.assignment.data, graph.edges
    )
    return errors.x_mse, float(errors.a_mse)


def train_reconstruction(model: ReconModel, graph: Graph, config: RunConfig, *, objective: Optional[str] = None) -> ReconResult:
    """Minimise the chosen discrepancy with Adam, early-stopping on the training loss."""
    objective = objective or config.objective
    if objective not in ("x", "a"):
        raise ConfigError(f"objective must be 'x' or 'a' for a single run, got {objective!r}", field="objective")
    if graph.node_features.size == 0:
        raise ConfigError("graph has no node features to reconstruct", field="graph")
    if objective == "a" and model.method == "topk":
        raise UnsupportedMetricError("adjacency objective needs an assignment matrix; topk has none", data={"pool": "topk"})

    adjacency = graph.dense_adjacency()
    layout = make_batch([graph])
    optimizer = Adam(model.parameters(), lr=config.lr, weight_decay=config.weight_decay, decoupled=config.decoupled_weight_decay)
    state = TrainState(seed=config.seed, patience=config.patience)
    best = model.state_dict()
    model.train()

    for epoch in range(1, config.max_epochs + 1):
        state.epoch = epoch
        loss, _, _ = _loss(model, layout, graph, adjacency, objective)
        optimizer.zero_grad()
        backward(loss, optimizer.params)
        # the monitored value is the loss of the parameters that produced it
        improved = state.observe(loss.item())
        if improved:
            best = model.state_dict()
        optimizer.step()
        state.history.append({"epoch": epoch, "train_loss": loss.item()})
        if epoch % LOG_EVERY == 0:
            logger.debug("epoch {:5d} {}-loss {:.6g}", epoch, objective, loss.item())
        if not improved and state.exhausted:
            logger.info("Early stop at epoch {} (best epoch {}, loss {:.6g})", epoch, state.best_epoch, state.best_loss)
            break

    model.load_state_dict(best)
    model.eval()
    with no_grad():
        out = model(graph)
    c = None if out.assignment is None else out.assignment.data
    errors = reconstruction_errors(graph.node_features, out.features.data, adjacency, c, graph.edges)
    assignment = None
    if c is not None:
        assignment = AssignmentMatrix(values=c.copy(), source=model.method, mode=model.assignment_mode)
        logger.info(
            "Assignment {}x{} valid={} (max row-sum deviation {:.2e})",
            assignment.n,
            assignment.k,
            assignment.is_valid(),
            float(np.max(np.abs(c.sum(axis=1) - 1.0))),
        )
    logger.info("Reconstruction [{} / {}-objective]: x_mse {:.3e} a_mse {}", model.method, objective, errors.x_mse, errors.a_mse)
    return ReconResult(
        model=model,
        objective=objective,
        errors=errors,
        state=state,
        reconstruction=out.features.data.copy(),
        assignment=assignment,
        history=state.history,
    )


def build_graph(config: RunConfig) -> Graph:
    return gen_ring(config.n) if config.graph == "ring" else gen_grid(config.rows, config.cols)


def run_reconstruction(config: RunConfig, *, objective: Optional[str] = None, graph: Optional[Graph] = None) -> ReconResult:
    """Build the synthetic graph and a fresh model from ``config.seed``, then train."""
    graph = graph if graph is not None else build_graph(config)
    rng = np.random.default_rng(config.seed)
    k = config.pooled_k(graph.n)
    model = ReconModel(graph.num_features, config, k, rng)
    logger.info("Reconstructing {} ({} nodes) with {} (k={}, {} parameters)", config.graph, graph.n, config.pool, k, model.num_parameters())
    return train_reconstruction(model, graph, config, objective=objective)


def cross_objective(config: RunConfig, graph: Optional[Graph] = None) -> Dict[str, ReconResult]:
    """Train once per objective from the same seed; keys are ``"x"`` and ``"a"``."""
    return {obj: run_reconstruction(config, objective=obj, graph=graph) for obj in ("x", "a")}
