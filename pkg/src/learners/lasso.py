"""
Lasso Module

L1-penalized linear (continuous) and logistic (binary) regression by cyclic coordinate
descent. It provides:
- the lambda path: 100 log-spaced values from lambda_max down to lambda_max * ratio
- warm starts along the path, strong-rule screening with a KKT check, active-set iteration
- iteratively reweighted least squares around the logistic loss
- early path termination once the deviance ratio reaches 0.999 or stops improving
- lambda chosen by K-fold cross-validation (minimum mean loss), final model on all rows

The objective is (1 / 2n) ||y - b0 - X b||^2 + lambda ||b||_1 on columns standardized
with the 1/n variance; coefficients are reported on the original scale. Coordinate
updates work on the weighted Gram matrix, so one update costs O(p) whatever n is.

"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from src.core.folds import make_folds
from src.learners.base import Learner, LearnerKind, LearnerSpec
from src.utils.seeds import child_seed, make_rng

logger = logging.getLogger("lasso")

path_length = 100
convergence_tol = 1e-7
max_dev_ratio = 0.999
min_dev_change = 1e-5
min_path_length = 5
_max_passes = 10_000
_max_irls = 25
_weight_floor = 1e-5
_prob_floor = 1e-6


@dataclass
class LassoPath:
    """
    Coefficients along a decreasing lambda sequence (original covariate scale).

    When the path stops early, entries past ``n_solved`` repeat the last solution.
    """

    lambdas: np.ndarray
    intercepts: np.ndarray
    coefs: np.ndarray
    dev_ratio: np.ndarray = None
    n_solved: int = None
    cv_loss: np.ndarray = None
    selected_index: int = None

    @property
    def selected_lambda(self):
        return None if self.selected_index is None else float(self.lambdas[self.selected_index])


def _soft_threshold(z, lam):
    return np.sign(z) * max(abs(z) - lam, 0.0)


def _standardize(x):
    means = x.mean(axis=0)
    scales = x.std(axis=0)
    usable = scales > 1e-12 * np.maximum(1.0, np.abs(means))
    xs = np.zeros_like(x)
    xs[:, usable] = (x[:, usable] - means[usable]) / scales[usable]
    return xs, means, np.where(usable, scales, 1.0), usable


def _coordinate_pass(gram, diag, grad, coef, lam, columns):
    """
    One sweep over ``columns``; updates grad and coef in place, returns max |change|.

    Column 0 is the unpenalized intercept.
    """
    max_change = 0.0
    for j in columns:
        old = coef[j]
        rho = grad[j] + diag[j] * old
        new = rho / diag[j] if j == 0 else _soft_threshold(rho, lam) / diag[j]
        if new != old:
            delta = new - old
            grad -= gram[:, j] * delta
            coef[j] = new
            max_change = max(max_change, abs(delta))
    return max_change


def _coordinate_descent(gram, grad, coef, lam, columns, tol=convergence_tol):
    """Minimize the quadratic model behind (gram, grad) over ``columns`` from a warm start."""
    diag = np.diag(gram)
    for _ in range(_max_passes):
        if _coordinate_pass(gram, diag, grad, coef, lam, columns) < tol:
            return coef
        active = columns[coef[columns] != 0.0]
        # iterate on the active set until it settles, then sweep everything again
        for _ in range(_max_passes):
            if _coordinate_pass(gram, diag, grad, coef, lam, active) < tol:
                break
    logger.warning("coordinate descent did not converge at lambda=%g", lam)
    return coef


def _solve_screened(gram, grad, coef, lam, lam_prev, usable):
    """
    Coordinate descent on the strong set {j: |grad_j| >= 2 lam - lam_prev} plus the
    nonzero coefficients, repeated until no discarded column violates the KKT condition.
    """
    if lam_prev is None:
        strong = usable.copy()
    else:
        strong = usable & ((np.abs(grad) >= 2.0 * lam - lam_prev) | (coef != 0.0))
    strong[0] = True
    while True:
        _coordinate_descent(gram, grad, coef, lam, np.flatnonzero(strong))
        violators = usable & ~strong & (np.abs(grad) > lam * (1.0 + 1e-9))
        if not violators.any():
            return coef
        strong |= violators


def _deviance(xs1, y, coef, binary):
    eta = xs1 @ coef
    if not binary:
        return float(np.sum((y - eta) ** 2))
    prob = np.clip(expit(eta), _prob_floor, 1.0 - _prob_floor)
    return -2.0 * float(np.sum(y * np.log(prob) + (1.0 - y) * np.log(1.0 - prob)))


def _fit_binary(xs1, y, lam, lam_prev, coef, usable):
    """IRLS around the logistic loss, at most _max_irls reweightings per lambda."""
    n = xs1.shape[0]
    for _ in range(_max_irls):
        prob = np.clip(expit(xs1 @ coef), _prob_floor, 1.0 - _prob_floor)
        w = np.maximum(prob * (1.0 - prob), _weight_floor)
        gram = (xs1 * w[:, None]).T @ xs1 / n
        grad = xs1.T @ (y - prob) / n
        old = coef.copy()
        _solve_screened(gram, grad, coef, lam, lam_prev, usable)
        if np.max(np.abs(coef - old)) < convergence_tol:
            break
    return coef


def lambda_max(x, y):
    """Smallest penalty with all slopes zero: max_j |<x_j, y - ybar>| / n on standardized columns."""
    xs, _, _, _ = _standardize(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    return float(np.max(np.abs(xs.T @ (y - y.mean())), initial=0.0) / xs.shape[0])


def lambda_sequence(x, y, n_lambdas=path_length):
    n, p = np.shape(x)
    top = lambda_max(x, y)
    if top <= 0:
        top = 1.0
    ratio = 1e-4 if n > p else 1e-2
    return np.geomspace(top, top * ratio, n_lambdas)


def _to_original_scale(coef, means, scales):
    slopes = coef[1:] / scales
    return coef[0] - float(np.dot(slopes, means)), slopes


def lasso_path(x, y, binary=False, lambdas=None, early_stop=True):
    """
    Solve the lasso along a lambda path with warm starts.

    The path stops once the deviance ratio 1 - dev / null_dev reaches 0.999, or, after
    the first 5 penalties, once it improves by less than a relative 1e-5. Remaining
    entries repeat the last solution.

    Args:
        x (numpy.ndarray): covariates, n x p
        y (numpy.ndarray): outcome
        binary (bool, optional): logistic loss. Defaults to False.
        lambdas (array_like, optional): decreasing penalties. Defaults to lambda_sequence(x, y).
        early_stop (bool, optional): allow early termination. Defaults to True.

    Returns:
        LassoPath: intercepts, coefficients and deviance ratio per lambda
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lambdas = lambda_sequence(x, y) if lambdas is None else np.asarray(lambdas, dtype=float)
    xs, means, scales, usable = _standardize(x)
    n, p = x.shape
    xs1 = np.column_stack([np.ones(n), xs])
    usable1 = np.concatenate([[True], usable])
    coef = np.zeros(p + 1)
    if binary:
        coef[0] = float(logit(np.clip(y.mean(), _prob_floor, 1.0 - _prob_floor)))
    else:
        coef[0] = float(y.mean())
        gram = xs1.T @ xs1 / n
        grad = xs1.T @ (y - coef[0]) / n
    null_dev = _deviance(xs1, y, coef, binary)

    n_lambdas = lambdas.shape[0]
    intercepts = np.empty(n_lambdas)
    coefs = np.empty((n_lambdas, p))
    dev_ratio = np.empty(n_lambdas)
    lam_prev = None
    solved = n_lambdas
    for k, lam in enumerate(lambdas):
        if binary:
            _fit_binary(xs1, y, lam, lam_prev, coef, usable1)
        else:
            _solve_screened(gram, grad, coef, lam, lam_prev, usable1)
        intercepts[k], coefs[k] = _to_original_scale(coef, means, scales)
        dev_ratio[k] = 1.0 - _deviance(xs1, y, coef, binary) / null_dev if null_dev > 0 else 0.0
        lam_prev = lam
        if not early_stop or k + 1 == n_lambdas:
            continue
        saturated = dev_ratio[k] >= max_dev_ratio or null_dev <= 0
        stalled = k + 1 >= min_path_length and dev_ratio[k] - dev_ratio[k - 1] < min_dev_change * dev_ratio[k]
        if saturated or stalled:
            solved = k + 1
            intercepts[solved:] = intercepts[k]
            coefs[solved:] = coefs[k]
            dev_ratio[solved:] = dev_ratio[k]
            logger.debug("path stopped after %d of %d penalties (deviance ratio %.5f)", solved, n_lambdas, dev_ratio[k])
            break
    return LassoPath(lambdas=lambdas, intercepts=intercepts, coefs=coefs, dev_ratio=dev_ratio, n_solved=solved)


def lasso_coefficients(x, y, lam, binary=False):
    """Intercept and coefficients (original scale) at a single penalty."""
    path = lasso_path(x, y, binary=binary, lambdas=[lam])
    return float(path.intercepts[0]), path.coefs[0]


def _linear_predictor(x, intercepts, coefs):
    return intercepts[None, :] + x @ coefs.T


def _loss(y, eta, binary):
    if binary:
        prob = np.clip(expit(eta), _prob_floor, 1.0 - _prob_floor)
        return -2.0 * (y[:, None] * np.log(prob) + (1.0 - y[:, None]) * np.log(1.0 - prob))
    return (y[:, None] - eta) ** 2


class Lasso(Learner):
    """
    Lasso with the penalty chosen by K-fold cross-validation.

    Args:
        folds (int, optional): number of CV folds. Defaults to 10.
        binary (bool, optional): logistic loss with probability output
        seed (int, optional): seed of the fold assignment

    Attributes:
        path: full-data LassoPath with CV loss and the selected index
        intercept, coef: model at the selected lambda
    """

    spec = LearnerSpec(LearnerKind.LASSO)

    def __init__(self, folds=10, binary=False, seed=0):
        super().__init__(binary)
        self.folds = folds
        self.seed = seed
        self.path = None
        self.intercept = None
        self.coef = None

    def _fit(self, x, y):
        n = x.shape[0]
        if n < 20:
            raise ValueError(f"lasso cross-validation needs at least 20 rows, got {n}")
        rng = make_rng(self.seed)
        path = lasso_path(x, y, binary=self.binary)
        solved = path.lambdas[: path.n_solved]
        assignment = make_folds(n, self.folds, labels=y if self.binary else None, rng=rng)
        total_loss = np.zeros(solved.shape[0])
        for v in range(self.folds):
            train, test = assignment.train_test(v)
            fold_path = lasso_path(x[train], y[train], binary=self.binary, lambdas=solved)
            eta = _linear_predictor(x[test], fold_path.intercepts, fold_path.coefs)
            total_loss += _loss(y[test], eta, self.binary).sum(axis=0)
        # past the end of the full-data path the model is constant, and so is its loss
        cv_loss = np.full(path.lambdas.shape[0], total_loss[-1] / n)
        cv_loss[: solved.shape[0]] = total_loss / n
        path.cv_loss = cv_loss
        path.selected_index = int(np.argmin(path.cv_loss))
        self.path = path
        self.intercept = float(path.intercepts[path.selected_index])
        self.coef = path.coefs[path.selected_index]
        logger.debug(
            "selected lambda %.4g (%d nonzero of %d)", path.selected_lambda, np.count_nonzero(self.coef), x.shape[1]
        )

    def nonzero(self):
        return np.flatnonzero(self.coef != 0.0)

    def _predict(self, x):
        eta = self.intercept + x @ self.coef
        return expit(eta) if self.binary else eta


def fit_lasso(d, folds=10, rng=None):
    """Fit the cross-validated lasso on a Dataset."""
    if d.p < 1:
        raise ValueError("the lasso needs at least one column")
    seed = child_seed(rng) if rng is not None else 0
    return Lasso(folds=folds, binary=d.binary, seed=seed).fit(d.x, d.y)
