"""Graph classification: cross-entropy training with early stopping, k-fold protocol."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
from loguru import logger

from gmtpool.autodiff import ops
from gmtpool.autodiff.optim import Adam
from gmtpool.autodiff.tensor import backward, no_grad
from gmtpool.config import RunConfig
from gmtpool.errors import ConfigError, UsageError
from gmtpool.graphs.graph import Dataset, Graph, GraphBatch, make_batch
from gmtpool.graphs.splits import FoldSplit
from gmtpool.graphs.tu import max_degree
from gmtpool.tasks.models import ClassifierModel


@dataclass
class TrainState:
    """Early-stopping bookkeeping for one training run."""

    seed: int
    patience: int
    epoch: int = 0
    best_loss: float = float("inf")
    best_epoch: int = 0
    waited: int = 0
    history: List[Dict[str, float]] = field(default_factory=list)

    def observe(self, loss: float) -> bool:
        """Record the monitored *loss*; True when it improved on the best so far."""
        if loss < self.best_loss:
            self.best_loss = loss
            self.best_epoch = self.epoch
            self.waited = 0
            return True
        self.waited += 1
        return False

    @property
    def exhausted(self) -> bool:
        return self.waited >= self.patience


@dataclass
class ClassifyResult:
    model: ClassifierModel
    state: TrainState
    val_loss: float
    val_acc: float


@dataclass
class FoldResult:
    seed: int
    fold: int
    test_acc: float
    val_acc: float
    val_loss: float
    best_epoch: int
    epochs: int
    history: List[Dict[str, float]] = field(default_factory=list)


def _batches(graphs: Sequence[Graph], batch_size: int) -> List[GraphBatch]:
    return [make_batch(graphs[i : i + batch_size]) for i in range(0, len(graphs), batch_size)]


def _labels(batch: GraphBatch) -> np.ndarray:
    if batch.labels is None:
        raise UsageError("classification needs a label on every graph", data={"graphs": batch.num_graphs})
    return batch.labels


def evaluate(model: ClassifierModel, batches: Sequence[GraphBatch]) -> tuple[float, float]:
    """Mean cross-entropy and accuracy over *batches*, in eval mode without recording."""
    model.eval()
    total_loss = 0.0
    correct = 0
    count = 0
    with no_grad():
        for batch in batches:
            labels = _labels(batch)
            logits = model(batch)
            total_loss += ops.cross_entropy(logits, labels).item() * batch.num_graphs
            correct += int(np.sum(np.argmax(logits.data, axis=1) == labels))
            count += batch.num_graphs
    return total_loss / max(count, 1), correct / max(count, 1)


def evaluate_accuracy(model: ClassifierModel, graphs: Sequence[Graph], batch_size: int = 128) -> float:
    """Fraction of *graphs* whose arg-max logit equals the label."""
    if not graphs:
        return 0.0
    return evaluate(model, _batches(list(graphs), batch_size))[1]


def train_classifier(
    model: ClassifierModel,
    train: Sequence[Graph],
    val: Sequence[Graph],
    config: RunConfig,
    rng: np.random.Generator,
    *,
    seed: int = 0,
) -> ClassifyResult:
    """Adam on cross-entropy; stop after ``patience`` epochs without a lower validation loss.

    The returned model carries the parameters of the best validation epoch.
    """
    if not train:
        raise ConfigError("training split is empty", field="split")
    monitor = list(val) if val else list(train)
    if not val:
        logger.warning("Validation split is empty; monitoring training loss instead")

    optimizer = Adam(
        model.parameters(),
        lr=config.lr,
        weight_decay=config.weight_decay,
        decoupled=config.decoupled_weight_decay,
    )
    monitor_batches = _batches(monitor, config.batch_size)
    state = TrainState(seed=seed, patience=config.patience)
    best = model.state_dict()
    train = list(train)

    for epoch in range(1, config.max_epochs + 1):
        state.epoch = epoch
        model.train()
        order = rng.permutation(len(train))
        running = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = make_batch([train[i] for i in order[start : start + config.batch_size]])
            loss = ops.cross_entropy(model(batch), _labels(batch))
            optimizer.zero_grad()
            backward(loss, optimizer.params)
            optimizer.step()
            running += loss.item() * batch.num_graphs
        train_loss = running / len(train)
        val_loss, val_acc = evaluate(model, monitor_batches)
        state.history.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss, "val_acc": val_acc})
        logger.debug("epoch {:4d} train {:.5f} val {:.5f} acc {:.4f}", epoch, train_loss, val_loss, val_acc)
        if state.observe(val_loss):
            best = model.state_dict()
        elif state.exhausted:
            logger.info("Early stop at epoch {} (best epoch {}, val loss {:.5f})", epoch, state.best_epoch, state.best_loss)
            break

    model.load_state_dict(best)
    val_loss, val_acc = evaluate(model, monitor_batches)
    return ClassifyResult(model=model, state=state, val_loss=val_loss, val_acc=val_acc)


def fold_dataset(dataset: Dataset, split: FoldSplit, config: RunConfig) -> Dataset:
    """Degree-feature datasets get a cap computed from the training indices only."""
    if dataset.feature_source != "degree":
        return dataset
    cap = config.degree_cap if config.degree_cap is not None else max_degree(dataset.subset(split.train))
    return dataset.with_degree_features(cap)


def run_fold(dataset: Dataset, split: FoldSplit, config: RunConfig, seed: int, fold: int) -> FoldResult:
    """Train and test one (seed, fold) job; its generator is ``default_rng([seed, fold])``."""
    rng = np.random.default_rng([seed, fold])
    data = fold_dataset(dataset, split, config)
    train, val, test = data.subset(split.train), data.subset(split.val), data.subset(split.test)
    k = config.pooled_k(max(g.n for g in train))
    model = ClassifierModel(data.num_features, data.num_classes, config, k, rng)
    result = train_classifier(model, train, val, config, rng, seed=seed)
    test_acc = evaluate_accuracy(result.model, test, config.batch_size)
    logger.info(
        "seed {} fold {}: test acc {:.4f} (val acc {:.4f}, best epoch {})",
        seed,
        fold,
        test_acc,
        result.val_acc,
        result.state.best_epoch,
    )
    return FoldResult(
        seed=seed,
        fold=fold,
        test_acc=test_acc,
        val_acc=result.val_acc,
        val_loss=result.val_loss,
        best_epoch=result.state.best_epoch,
        epochs=result.state.epoch,
        history=result.state.history,
    )


def summarise(results: Sequence[FoldResult]) -> Dict[str, float]:
    """Mean ± std of the per-seed mean test accuracy (and validation accuracy)."""
    by_seed: Dict[int, List[FoldResult]] = {}
    for r in results:
        by_seed.setdefault(r.seed, []).append(r)
    test = np.array([np.mean([r.test_acc for r in rs]) for rs in by_seed.values()])
    val = np.array([np.mean([r.val_acc for r in rs]) for rs in by_seed.values()])
    return {
        "runs": float(len(by_seed)),
        "folds": float(len(results)),
        "test_acc_mean": float(test.mean()),
        "test_acc_std": float(test.std()),
        "val_acc_mean": float(val.mean()),
        "val_acc_std": float(val.std()),
    }
