"""
Cross-validation fold assignment, optionally stratified by a 0/1 label.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray
    V: int

    def train_test(self, v):
        """Row indices outside and inside fold v."""
        return np.flatnonzero(self.fold_of != v), np.flatnonzero(self.fold_of == v)

    def sizes(self):
        return np.bincount(self.fold_of, minlength=self.V)


def _balanced_labels(size, V, rng, offset=0):
    # fold labels offset, offset+1, ... cycled; sizes differ by at most one
    labels = (np.arange(size) + offset) % V
    return rng.permutation(labels)


def make_folds(n, V, labels=None, rng=None):
    """
    Random balanced partition of n rows into V folds.

    Args:
        n (int): number of rows
        V (int): number of folds, at least 2
        labels (array_like, optional): 0/1 labels; each class is partitioned separately
        rng (numpy.random.Generator): generator

    Returns:
        FoldAssignment: fold index per row
    """
    if V < 2:
        raise ValueError(f"need at least 2 folds, got {V}")
    if n < V:
        raise ValueError(f"cannot split {n} rows into {V} folds")
    rng = np.random.default_rng(0) if rng is None else rng
    fold_of = np.empty(n, dtype=int)
    if labels is None:
        fold_of[:] = _balanced_labels(n, V, rng)
        return FoldAssignment(fold_of=fold_of, V=V)
    labels = np.asarray(labels)
    if labels.shape[0] != n:
        raise ValueError(f"labels have length {labels.shape[0]}, expected {n}")
    if np.any((labels != 0) & (labels != 1)):
        raise ValueError("stratification labels must be 0 or 1")
    offset = 0
    for value in (0, 1):
        members = np.flatnonzero(labels == value)
        if members.size < V:
            raise ValueError(f"class {value} has {members.size} members, fewer than {V} folds")
        fold_of[members] = _balanced_labels(members.size, V, rng, offset)
        # continue the cycle so that overall fold sizes also stay balanced
        offset = (offset + members.size) % V
    return FoldAssignment(fold_of=fold_of, V=V)
