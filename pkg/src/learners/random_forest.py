"""
Random forests: bootstrap-aggregated CART trees with mtry = floor(sqrt(p)) candidate
columns per split. Binary outcomes use the Gini criterion and average the leaf class-1
fractions, so predictions are probabilities.
"""
import logging

import numpy as np
from joblib import Parallel, delayed

from src.learners.base import Learner, LearnerKind
from src.learners.cart import grow_tree
from src.utils.seeds import child_seed, make_rng

logger = logging.getLogger("random_forest")


def _grow_bootstrap_tree(x, y, seed, criterion, min_node_size, mtry):
    rng = make_rng(seed)
    n = x.shape[0]
    rows = rng.integers(0, n, size=n)
    tree = grow_tree(x[rows], y[rows], rng, criterion=criterion, min_split=min_node_size, mtry=mtry)
    return tree, rows


class RandomForest(Learner):
    """
    Forest of n_trees trees, each grown on a bootstrap resample of size n.

    Args:
        min_node_size (int): nodes with fewer observations are not split
        n_trees (int, optional): number of trees. Defaults to 1000.
        binary (bool, optional): 0/1 outcome (Gini splits, probability output)
        mtry (int, optional): candidate columns per split. Defaults to floor(sqrt(p)).
        seed (int, optional): seed of the forest; each tree gets a derived seed
        n_jobs (int, optional): joblib workers for growing trees. Defaults to 1.
    """

    def __init__(self, min_node_size=5, n_trees=1000, binary=False, mtry=None, seed=0, n_jobs=1):
        super().__init__(binary)
        self.min_node_size = int(min_node_size)
        self.n_trees = int(n_trees)
        self.mtry = mtry
        self.seed = seed
        self.n_jobs = n_jobs
        self.trees = []
        self.oob_error_ = None

    def _fit(self, x, y):
        p = x.shape[1]
        mtry = self.mtry if self.mtry is not None else max(1, int(np.floor(np.sqrt(p))))
        criterion = "gini" if self.binary else "variance"
        rng = make_rng(self.seed)
        seeds = [child_seed(rng) for _ in range(self.n_trees)]
        grown = Parallel(n_jobs=self.n_jobs)(
            delayed(_grow_bootstrap_tree)(x, y, seed, criterion, self.min_node_size, mtry) for seed in seeds
        )
        self.trees = [tree for tree, _ in grown]
        self.oob_error_ = self._oob_error(x, y, [rows for _, rows in grown])
        logger.debug("grew %d trees (mtry=%d, oob error %.4f)", self.n_trees, mtry, self.oob_error_)

    def _oob_error(self, x, y, bootstrap_rows):
        total = np.zeros(x.shape[0])
        count = np.zeros(x.shape[0])
        for tree, rows in zip(self.trees, bootstrap_rows):
            out = np.ones(x.shape[0], dtype=bool)
            out[rows] = False
            if np.any(out):
                total[out] += tree.predict(x[out])
                count[out] += 1
        seen = count > 0
        if not np.any(seen):
            return float("nan")
        return float(np.mean((y[seen] - total[seen] / count[seen]) ** 2))

    def _predict(self, x):
        pred = np.zeros(x.shape[0])
        for tree in self.trees:
            pred += tree.predict(x)
        return pred / len(self.trees)

    def impurity_importance(self):
        """Per-feature split-criterion decrease summed over splits, averaged over trees."""
        if not self.trees:
            raise ValueError("forest has not been fitted")
        return np.mean([tree.importance for tree in self.trees], axis=0)


def fit_random_forest(d, spec, n_trees=1000, rng=None, n_jobs=1):
    """
    Fit the forest learner of ``spec`` on a Dataset.

    Returns:
        RandomForest: the fitted forest
    """
    if spec.kind is not LearnerKind.RANDOM_FOREST:
        raise ValueError(f"not a forest spec: {spec}")
    if d.n < 2:
        raise ValueError("a forest needs at least 2 rows")
    seed = child_seed(rng) if rng is not None else 0
    model = RandomForest(spec.min_node_size, n_trees=n_trees, binary=d.binary, seed=seed, n_jobs=n_jobs)
    model.spec = spec
    return model.fit(d.x, d.y)


def rf_impurity_importance(model):
    if not isinstance(model, RandomForest):
        raise ValueError(f"impurity importance needs a forest, got {type(model).__name__}")
    return model.impurity_importance()
