"""
The estimators compared in the benchmark: the lasso alone, the Super Learner with the
full learner grid and the Super Learner without the lasso learner, the latter two
crossed with a screen set.
"""
from dataclasses import dataclass
from enum import Enum

from src.core.screens import ScreenSetName, expand_screen_set
from src.core.super_learner import fit_superlearner
from src.learners import fit_lasso, learner_grid


class EstimatorKind(str, Enum):
    LASSO = "lasso"
    SL = "sl"
    SL_MINUS_LASSO = "sl-minus-lasso"


@dataclass(frozen=True)
class EstimatorSpec:
    """An estimator arm. The lasso ignores the screen set, which is stored as "none"."""

    kind: EstimatorKind
    screen_set: ScreenSetName = ScreenSetName.NONE

    def __post_init__(self):
        kind = EstimatorKind(self.kind)
        object.__setattr__(self, "kind", kind)
        screen_set = ScreenSetName.NONE if kind is EstimatorKind.LASSO else ScreenSetName(self.screen_set)
        object.__setattr__(self, "screen_set", screen_set)

    def __str__(self):
        if self.kind is EstimatorKind.LASSO:
            return self.kind.value
        return f"{self.kind.value}[{self.screen_set.value}]"


def expand_arms(estimators, screen_sets):
    """
    Estimator arms: one for the lasso, one per screen set for each Super Learner.

    The full design (3 estimators, 4 screen sets) gives 1 + 2 x 4 = 9 arms.
    """
    arms = []
    for kind in dict.fromkeys(EstimatorKind(e) for e in estimators):
        if kind is EstimatorKind.LASSO:
            arms.append(EstimatorSpec(kind))
        else:
            arms.extend(EstimatorSpec(kind, ScreenSetName(s)) for s in dict.fromkeys(screen_sets))
    return arms


def fit_estimator(d, arm, rng, cv_folds=5, forest_trees=1000):
    """
    Fit one estimator arm.

    Returns:
        Lasso or SLModel: a fitted model with a ``predict(x)`` method
    """
    if arm.kind is EstimatorKind.LASSO:
        return fit_lasso(d, folds=10, rng=rng)
    return fit_superlearner(
        d,
        expand_screen_set(arm.screen_set, d.p),
        learner_grid(include_lasso=arm.kind is EstimatorKind.SL),
        V=cv_folds,
        rng=rng,
        forest_trees=forest_trees,
    )
