"""
Gradient boosted regression trees for squared-error and logistic loss.
"""
import numpy as np
from scipy.special import expit, logit

from src.learners.base import Learner, LearnerKind
from src.learners.cart import grow_tree
from src.utils.seeds import child_seed, make_rng

_prob_floor = 1e-6


class GradientBoosting(Learner):
    """
    Stagewise additive model of depth-limited regression trees.

    F_0 is the outcome mean (continuous) or its log-odds (binary). Every stage fits a
    tree to the negative gradient and adds ``shrinkage`` times the tree. For the logistic
    loss the leaf values are one Newton step, sum(y - p) / sum(p (1 - p)).

    Args:
        n_trees (int): number of stages
        shrinkage (float): learning rate, >= 0
        max_depth (int, optional): maximum tree depth. Defaults to 4.
        min_obs_node (int, optional): minimum observations per leaf. Defaults to 10.
        binary (bool, optional): logistic loss with probability output
        seed (int, optional): seed (trees use every column, so it only fixes ties)

    Attributes:
        f0: initial constant on the link scale
        trees: fitted stage trees
        train_loss_: training loss after F_0 and after every stage
    """

    def __init__(self, n_trees=100, shrinkage=0.1, max_depth=4, min_obs_node=10, binary=False, seed=0):
        super().__init__(binary)
        if shrinkage < 0:
            raise ValueError(f"shrinkage must be non-negative, got {shrinkage}")
        self.n_trees = int(n_trees)
        self.shrinkage = float(shrinkage)
        self.max_depth = max_depth
        self.min_obs_node = min_obs_node
        self.seed = seed
        self.f0 = None
        self.trees = []
        self.train_loss_ = []

    def _loss(self, y, f):
        if self.binary:
            prob = np.clip(expit(f), _prob_floor, 1.0 - _prob_floor)
            return float(-np.mean(y * np.log(prob) + (1.0 - y) * np.log(1.0 - prob)))
        return float(np.mean((y - f) ** 2))

    def _fit(self, x, y):
        rng = make_rng(self.seed)
        if self.binary:
            self.f0 = float(logit(np.clip(np.mean(y), _prob_floor, 1.0 - _prob_floor)))
        else:
            self.f0 = float(np.mean(y))
        f = np.full(y.shape[0], self.f0)
        self.trees = []
        self.train_loss_ = [self._loss(y, f)]
        for _ in range(self.n_trees):
            if self.binary:
                prob = expit(f)
                gradient = y - prob
                tree = grow_tree(
                    x,
                    gradient,
                    rng,
                    min_leaf=self.min_obs_node,
                    max_depth=self.max_depth,
                    gradient=gradient,
                    hessian=prob * (1.0 - prob),
                )
            else:
                tree = grow_tree(x, y - f, rng, min_leaf=self.min_obs_node, max_depth=self.max_depth)
            f = f + self.shrinkage * tree.predict(x)
            self.trees.append(tree)
            self.train_loss_.append(self._loss(y, f))

    def decision_function(self, x):
        f = np.full(x.shape[0], self.f0)
        for tree in self.trees:
            f += self.shrinkage * tree.predict(x)
        return f

    def _predict(self, x):
        f = self.decision_function(x)
        return expit(f) if self.binary else f


def fit_grad_boost(d, spec, max_depth=4, min_obs_node=10, rng=None):
    if spec.kind is not LearnerKind.GRAD_BOOST:
        raise ValueError(f"not a boosting spec: {spec}")
    if d.n < 20:
        raise ValueError(f"boosting needs at least 20 rows, got {d.n}")
    seed = child_seed(rng) if rng is not None else 0
    model = GradientBoosting(
        spec.n_trees, spec.shrinkage, max_depth=max_depth, min_obs_node=min_obs_node, binary=d.binary, seed=seed
    )
    model.spec = spec
    return model.fit(d.x, d.y)
