"""Seeded stratified k-fold splits with a stratified validation carve-out."""

from __future__ import annotations

from typing import List, NamedTuple, Union

import numpy as np

from gmtpool.errors import SplitError
from gmtpool.graphs.graph import Dataset


class FoldSplit(NamedTuple):
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def _stratified_take(indices: np.ndarray, labels: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Pick ``round(fraction * |class|)`` members of every class (at least one, never all)."""
    chosen = []
    for cls in np.unique(labels[indices]):
        members = indices[labels[indices] == cls]
        if members.size < 2 or fraction <= 0.0:
            continue
        take = min(max(1, int(round(fraction * members.size))), members.size - 1)
        chosen.append(rng.permutation(members)[:take])
    return np.sort(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=np.int64)


def stratified_kfold(
    data: Union[Dataset, np.ndarray],
    k: int,
    seed: int,
    *,
    val_fraction: float = 0.1,
) -> List[FoldSplit]:
    """Split into *k* (train, val, test) index triples.

    Members of each class are shuffled and dealt round-robin over the folds;
    the dealing position carries over from one class to the next so fold sizes
    differ by at most one.  Per fold, *val_fraction* of the remaining training
    indices (stratified) become the validation set.
    """
    labels = data.labels if isinstance(data, Dataset) else np.asarray(data, dtype=np.int64)
    if k < 2:
        raise SplitError(f"need at least 2 folds, got {k}", data={"k": k})
    rng = np.random.default_rng(seed)
    fold_of = np.empty(labels.size, dtype=np.int64)
    cursor = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < k:
            raise SplitError(
                f"class {int(cls)} has {members.size} members, fewer than {k} folds",
                data={"class": int(cls), "members": int(members.size), "k": k},
            )
        members = rng.permutation(members)
        fold_of[members] = (cursor + np.arange(members.size)) % k
        cursor = (cursor + members.size) % k

    splits: List[FoldSplit] = []
    everything = np.arange(labels.size)
    for fold in range(k):
        test = everything[fold_of == fold]
        rest = everything[fold_of != fold]
        val = _stratified_take(rest, labels, val_fraction, rng)
        train = np.setdiff1d(rest, val, assume_unique=True)
        splits.append(FoldSplit(train=train, val=val, test=test))
    return splits
