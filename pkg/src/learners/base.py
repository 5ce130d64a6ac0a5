"""
Learner specifications and the common fitted-model interface.

A LearnerSpec is the algebraic description of one candidate learner with fixed tuning
values; its string form ("lasso", "rf:<min_node_size>", "gbt:<n_trees>:<shrinkage>",
"mars") is what run configurations and result files use.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

forest_node_sizes = (5, 20, 50, 100, 250)
boosting_tree_counts = (100, 500, 1000)
boosting_shrinkages = (0.01, 0.1)


class LearnerKind(str, Enum):
    LASSO = "lasso"
    RANDOM_FOREST = "rf"
    GRAD_BOOST = "gbt"
    MARS = "mars"


@dataclass(frozen=True)
class LearnerSpec:
    """One learner with its tuning values.

    Args:
        kind (LearnerKind): learner family
        min_node_size (int, optional): forests only, in {5, 20, 50, 100, 250}
        n_trees (int, optional): boosting only, in {100, 500, 1000}
        shrinkage (float, optional): boosting only, in {0.01, 0.1}
    """

    kind: LearnerKind
    min_node_size: int = None
    n_trees: int = None
    shrinkage: float = None

    def __post_init__(self):
        kind = LearnerKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is LearnerKind.RANDOM_FOREST:
            if self.min_node_size not in forest_node_sizes:
                raise ValueError(f"min_node_size must be one of {forest_node_sizes}, got {self.min_node_size}")
        elif kind is LearnerKind.GRAD_BOOST:
            if self.n_trees not in boosting_tree_counts:
                raise ValueError(f"n_trees must be one of {boosting_tree_counts}, got {self.n_trees}")
            if self.shrinkage not in boosting_shrinkages:
                raise ValueError(f"shrinkage must be one of {boosting_shrinkages}, got {self.shrinkage}")

    @classmethod
    def parse(cls, text):
        """Parse "lasso", "rf:20", "gbt:500:0.01" or "mars"."""
        parts = text.strip().lower().split(":")
        try:
            kind = LearnerKind(parts[0])
            if kind is LearnerKind.RANDOM_FOREST and len(parts) == 2:
                return cls(kind, min_node_size=int(parts[1]))
            if kind is LearnerKind.GRAD_BOOST and len(parts) == 3:
                return cls(kind, n_trees=int(parts[1]), shrinkage=float(parts[2]))
            if kind in (LearnerKind.LASSO, LearnerKind.MARS) and len(parts) == 1:
                return cls(kind)
        except ValueError as e:
            raise ValueError(f"invalid learner spec {text!r}: {e}") from e
        raise ValueError(f"invalid learner spec {text!r}")

    def __str__(self):
        if self.kind is LearnerKind.RANDOM_FOREST:
            return f"rf:{self.min_node_size}"
        if self.kind is LearnerKind.GRAD_BOOST:
            return f"gbt:{self.n_trees}:{self.shrinkage:g}"
        return self.kind.value


def learner_grid(include_lasso=True):
    """The candidate learner library: lasso, 5 forests, 6 boosting settings, MARS."""
    grid = [LearnerSpec(LearnerKind.LASSO)] if include_lasso else []
    grid.extend(LearnerSpec(LearnerKind.RANDOM_FOREST, min_node_size=size) for size in forest_node_sizes)
    grid.extend(
        LearnerSpec(LearnerKind.GRAD_BOOST, n_trees=trees, shrinkage=rate)
        for trees in boosting_tree_counts
        for rate in boosting_shrinkages
    )
    grid.append(LearnerSpec(LearnerKind.MARS))
    return grid


class Learner(object):
    """Common interface of every fitted model.

    Subclasses implement ``_fit(x, y)`` and ``_predict(x)``; ``predict`` checks the
    column count and bounds binary predictions to [0, 1].

    Attributes:
        spec: the LearnerSpec (None for internal models such as screen forests)
        binary: whether the outcome is 0/1
        n_features: number of training columns
    """

    spec = None

    def __init__(self, binary=False):
        self.binary = binary
        self.n_features = None

    def fit(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValueError(f"x of shape {x.shape} does not match y of length {y.shape[0]}")
        self.n_features = x.shape[1]
        self._fit(x, y)
        return self

    def predict(self, x):
        if self.n_features is None:
            raise ValueError(f"{type(self).__name__} has not been fitted")
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ValueError(f"model was trained on {self.n_features} columns, got input of shape {x.shape}")
        pred = self._predict(x)
        if self.binary:
            pred = np.clip(pred, 0.0, 1.0)
        return pred

    def _fit(self, x, y):
        raise NotImplementedError

    def _predict(self, x):
        raise NotImplementedError


class ConstantModel(Learner):
    """Predicts the training mean; the fallback for failed candidate fits."""

    def __init__(self, binary=False, spec=None):
        super().__init__(binary)
        self.spec = spec
        self.value = None

    def _fit(self, x, y):
        self.value = float(np.mean(y))

    def _predict(self, x):
        return np.full(x.shape[0], self.value)
