"""
Screens Module

Variable screens applied before a learner. Every screen maps a training Dataset to a
nonempty FeatureSubset:
- all: every column
- univar_cor_p: columns whose Pearson correlation-test p-value is at most a threshold
- rank_cor_top_k: the k columns with the smallest Spearman correlation-test p-values
- rf_top_k: the k columns with the largest random-forest impurity importance
- lasso: columns with a nonzero coefficient in the cross-validated lasso

If a screen selects nothing, the two columns with the largest absolute marginal
correlation are kept instead.

"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import rankdata, t as student_t

from src.core.data_model import FeatureSubset
from src.learners.lasso import fit_lasso
from src.learners.random_forest import RandomForest
from src.utils.seeds import child_seed

logger = logging.getLogger("screens")

fallback_size = 2
rank_cor_sizes = (10, 25, 50)
univar_cor_thresholds = (0.2, 0.4)
rf_sizes = (10, 25)


class ScreenKind(str, Enum):
    ALL = "all"
    UNIVAR_COR_P = "univar_cor_p"
    RANK_COR_TOP_K = "rank_cor_top_k"
    RF_TOP_K = "rf_top_k"
    LASSO = "lasso"


class ScreenSetName(str, Enum):
    NONE = "none"
    LASSO = "lasso"
    ALL = "all"
    ALL_MINUS_LASSO = "all-minus-lasso"


@dataclass(frozen=True)
class ScreenSpec:
    """One screen with its tuning value.

    Args:
        kind (ScreenKind): screen family
        threshold (float, optional): p-value threshold in (0, 1), univar_cor_p only
        k (int, optional): number of kept columns, rank_cor_top_k and rf_top_k only
    """

    kind: ScreenKind
    threshold: float = None
    k: int = None

    def __post_init__(self):
        kind = ScreenKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ScreenKind.UNIVAR_COR_P:
            if self.threshold is None or not 0.0 < self.threshold < 1.0:
                raise ValueError(f"p-value threshold must lie in (0, 1), got {self.threshold}")
        elif kind in (ScreenKind.RANK_COR_TOP_K, ScreenKind.RF_TOP_K):
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise ValueError(f"k must be a positive integer, got {self.k}")

    @property
    def name(self):
        if self.kind is ScreenKind.UNIVAR_COR_P:
            return f"univar_cor_p{self.threshold:g}"
        if self.kind is ScreenKind.RANK_COR_TOP_K:
            return f"rank_cor_top{self.k}"
        if self.kind is ScreenKind.RF_TOP_K:
            return f"rf_top{self.k}"
        return self.kind.value

    def __str__(self):
        return self.name


all_vars = ScreenSpec(ScreenKind.ALL)
lasso_nonzero = ScreenSpec(ScreenKind.LASSO)


def expand_screen_set(name, p):
    """
    The list of screens behind a screen-set name.

    For p <= 10 the "all" set is [all, univar_cor_p0.2, lasso]; for larger p it also
    carries the rank-correlation, second univariate and forest screens.

    Args:
        name (ScreenSetName or str): "none", "lasso", "all" or "all-minus-lasso"
        p (int): number of covariates

    Returns:
        list: ScreenSpec objects in a fixed order
    """
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    name = ScreenSetName(name)
    if name is ScreenSetName.NONE:
        return [all_vars]
    if name is ScreenSetName.LASSO:
        return [lasso_nonzero]
    if p <= 10:
        screens = [all_vars, ScreenSpec(ScreenKind.UNIVAR_COR_P, threshold=univar_cor_thresholds[0])]
    else:
        screens = [all_vars]
        screens.extend(ScreenSpec(ScreenKind.RANK_COR_TOP_K, k=k) for k in rank_cor_sizes)
        screens.extend(ScreenSpec(ScreenKind.UNIVAR_COR_P, threshold=t) for t in univar_cor_thresholds)
        screens.extend(ScreenSpec(ScreenKind.RF_TOP_K, k=k) for k in rf_sizes)
    if name is ScreenSetName.ALL:
        screens.append(lasso_nonzero)
    return screens


def _column_correlations(x, y):
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    sx = np.sqrt(np.sum(xc * xc, axis=0))
    sy = np.sqrt(np.sum(yc * yc))
    constant = (sx <= 1e-12 * np.maximum(1.0, np.abs(x).max(axis=0))) | (sy <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (xc.T @ yc) / (sx * sy)
    r = np.where(constant, 0.0, np.clip(r, -1.0, 1.0))
    return r, constant


def column_pvalues(x, y):
    """
    Two-sided Pearson correlation-test p-values of every column of x against y.

    t = r sqrt((n - 2) / (1 - r^2)) is referred to a Student t with n - 2 degrees of
    freedom. Constant inputs get p-value 1.

    Returns:
        tuple: (p-values, correlations), both of length p
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = y.shape[0]
    if n < 3 or x.shape[0] != n:
        raise ValueError(f"correlation test needs equal lengths n >= 3, got {x.shape[0]} and {n}")
    r, constant = _column_correlations(x, y)
    if np.any(constant):
        logger.warning("constant input in correlation test for columns %s", np.flatnonzero(constant).tolist())
    df = n - 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stat = r * np.sqrt(df / (1.0 - r * r))
    pvalues = np.where(np.abs(r) >= 1.0, 0.0, 2.0 * student_t.sf(np.abs(t_stat), df))
    pvalues = np.where(constant, 1.0, np.clip(pvalues, 0.0, 1.0))
    return pvalues, r


def pearson_cor_test_pvalue(x, y):
    pvalues, _ = column_pvalues(np.asarray(x, dtype=float)[:, None], y)
    return float(pvalues[0])


def spearman_cor_test_pvalue(x, y):
    """Pearson test on mid-ranks."""
    return pearson_cor_test_pvalue(rankdata(x), rankdata(y))


def _fallback(d):
    _, r = column_pvalues(d.x, d.y)
    order = np.lexsort((np.arange(d.p), -np.abs(r)))
    return FeatureSubset.from_indices(order[: min(fallback_size, d.p)])


def _top_k(scores, tiebreak, k):
    # ascending score, then descending |tiebreak|, then lower index
    order = np.lexsort((np.arange(scores.shape[0]), -np.abs(tiebreak), scores))
    return order[:k]


def fit_screen(d, spec, rng=None, forest_trees=1000):
    """
    Fit a screen on a training dataset.

    Args:
        d (Dataset): training data
        spec (ScreenSpec): the screen
        rng (numpy.random.Generator, optional): seeds the forest and lasso screens
        forest_trees (int, optional): trees of the forest screen. Defaults to 1000.

    Returns:
        FeatureSubset: the selected columns, never empty
    """
    p = d.p
    if spec.kind is ScreenKind.ALL:
        return FeatureSubset.all_columns(p)
    if spec.kind is ScreenKind.UNIVAR_COR_P:
        pvalues, _ = column_pvalues(d.x, d.y)
        selected = np.flatnonzero(pvalues <= spec.threshold)
    elif spec.kind is ScreenKind.RANK_COR_TOP_K:
        if spec.k >= p:
            return FeatureSubset.all_columns(p)
        pvalues, rho = column_pvalues(rankdata(d.x, axis=0), rankdata(d.y))
        selected = _top_k(pvalues, rho, spec.k)
    elif spec.kind is ScreenKind.RF_TOP_K:
        if spec.k >= p:
            return FeatureSubset.all_columns(p)
        if d.n < 10:
            raise ValueError(f"forest screen needs at least 10 rows, got {d.n}")
        seed = child_seed(rng) if rng is not None else 0
        forest = RandomForest(1 if d.binary else 5, n_trees=forest_trees, binary=d.binary, seed=seed)
        importance = forest.fit(d.x, d.y).impurity_importance()
        selected = _top_k(-importance, np.zeros(p), spec.k)
    else:
        if d.n < 20:
            raise ValueError(f"lasso screen needs at least 20 rows, got {d.n}")
        selected = fit_lasso(d, folds=10, rng=rng).nonzero()
    if selected.size == 0:
        logger.debug("%s selected no columns, keeping the top %d by |correlation|", spec.name, fallback_size)
        return _fallback(d)
    return FeatureSubset.from_indices(selected)
