from .base import (
    ConstantModel,
    Learner,
    LearnerKind,
    LearnerSpec,
    boosting_shrinkages,
    boosting_tree_counts,
    forest_node_sizes,
    learner_grid,
)
from .cart import Tree, grow_tree
from .lasso import Lasso, LassoPath, fit_lasso, lasso_coefficients, lasso_path
from .random_forest import RandomForest, fit_random_forest, rf_impurity_importance
from .grad_boost import GradientBoosting, fit_grad_boost
from .mars import Mars, fit_mars


def fit_learner(d, spec, rng=None, forest_trees=1000, n_jobs=1):
    """Fit the learner described by ``spec`` on a Dataset."""
    if spec.kind is LearnerKind.LASSO:
        return fit_lasso(d, rng=rng)
    if spec.kind is LearnerKind.RANDOM_FOREST:
        return fit_random_forest(d, spec, n_trees=forest_trees, rng=rng, n_jobs=n_jobs)
    if spec.kind is LearnerKind.GRAD_BOOST:
        return fit_grad_boost(d, spec, rng=rng)
    return fit_mars(d, rng=rng)


def predict(model, x):
    return model.predict(x)
