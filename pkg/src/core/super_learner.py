"""
Super Learner Module

Cross-validated convex ensembling over a screen x learner candidate library.

The Super Learner:
1. splits the rows into V folds (stratified by the outcome for binary data)
2. for every fold, fits each screen on the training rows and each learner on the
   screened training rows, and predicts the held-out rows (the Z matrix)
3. finds convex weights over the Z columns: non-negative least squares followed by
   normalization (continuous) or the binomial log-likelihood over the simplex (binary)
4. refits every candidate on the full dataset; the ensemble prediction is the weighted
   sum of the candidate predictions

"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.optimize import nnls
from scipy.special import softmax

from src.core.data_model import subset_columns
from src.core.folds import make_folds
from src.core.screens import fit_screen
from src.learners import ConstantModel, fit_learner
from src.utils.seeds import child_seed, derive_seed, make_rng

logger = logging.getLogger("superlearner")

prob_clip = 1e-6
min_rows = 40
_eg_max_iter = 10_000
_eg_tol = 1e-10
_eg_min_step = 1e-30


@dataclass(frozen=True)
class CandidateLibrary:
    """Ordered (ScreenSpec, LearnerSpec) pairs, screen-major."""

    candidates: tuple

    @classmethod
    def build(cls, screens, learners):
        if not screens or not learners:
            raise ValueError("a candidate library needs at least one screen and one learner")
        return cls(tuple((screen, learner) for screen in screens for learner in learners))

    @property
    def names(self):
        return [f"{screen.name}/{learner}" for screen, learner in self.candidates]

    @property
    def screens(self):
        """Distinct screens in library order."""
        return list(dict.fromkeys(screen for screen, _ in self.candidates))

    def __len__(self):
        return len(self.candidates)


@dataclass(frozen=True)
class CandidateFailure:
    """A candidate that could not be fit; ``fold`` is None for the full-data refit."""

    fold: int
    candidate: str
    error: str


def _fit_candidates(train, test_x, lib, seed, fold, forest_trees):
    """
    Fit every candidate of ``lib`` on ``train``.

    Screens are fit once and shared by all learners of that screen. A candidate whose
    screen or learner fails is replaced by a training-mean model.

    Returns:
        tuple: (predictions for test_x or None, list of (FeatureSubset, model), failures)
    """
    fitted = []
    failures = []
    subsets = {}
    for screen in lib.screens:
        try:
            subsets[screen] = fit_screen(train, screen, make_rng(derive_seed(seed, screen.name)), forest_trees)
        except Exception as e:
            logger.warning("screen %s failed (fold %s): %s", screen.name, fold, e)
            subsets[screen] = e
    for (screen, learner), name in zip(lib.candidates, lib.names):
        subset = subsets[screen]
        try:
            if isinstance(subset, Exception):
                raise subset
            model = fit_learner(
                subset_columns(train, subset),
                learner,
                make_rng(derive_seed(seed, screen.name, learner)),
                forest_trees=forest_trees,
            )
        except Exception as e:
            logger.warning("candidate %s failed (fold %s): %s", name, fold, e)
            failures.append(CandidateFailure(fold, name, str(e)))
            subset = None
            model = ConstantModel(train.binary, learner).fit(train.x[:, :1], train.y)
        fitted.append((subset, model))
    if test_x is None:
        return None, fitted, failures
    z = np.column_stack([_candidate_predict(subset, model, test_x) for subset, model in fitted])
    return z, fitted, failures


def _candidate_predict(subset, model, x):
    if subset is None:
        return model.predict(x[:, :1])
    return model.predict(x[:, subset.as_array()])


def _fold_task(d, lib, folds, v, seed, forest_trees):
    train_rows, test_rows = folds.train_test(v)
    z, _, failures = _fit_candidates(d.rows(train_rows), d.x[test_rows], lib, seed, v, forest_trees)
    logger.debug("fold %d: %d training rows, %d held out", v, train_rows.shape[0], test_rows.shape[0])
    return test_rows, z, failures


def cv_predictions(d, lib, folds, rng=None, forest_trees=1000, n_jobs=1):
    """
    Cross-validated candidate predictions.

    Row i of the result only depends on models fit without the fold of row i; screens
    are refit inside every fold.

    Args:
        d (Dataset): training data
        lib (CandidateLibrary): candidates
        folds (FoldAssignment): fold of every row
        rng (numpy.random.Generator, optional): source of the per-fold seeds
        forest_trees (int, optional): trees of every forest learner and screen
        n_jobs (int, optional): joblib workers over folds

    Returns:
        tuple: (Z matrix n x len(lib), list of CandidateFailure)
    """
    base = child_seed(rng) if rng is not None else 0
    results = Parallel(n_jobs=n_jobs)(
        delayed(_fold_task)(d, lib, folds, v, derive_seed(base, "fold", v), forest_trees) for v in range(folds.V)
    )
    z = np.empty((d.n, len(lib)))
    failures = []
    for test_rows, fold_z, fold_failures in results:
        z[test_rows] = fold_z
        failures.extend(fold_failures)
    return z, failures


def meta_nnls(z, y):
    """
    Non-negative least squares weights, normalized to sum to one.

    A zero solution falls back to uniform weights.
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("Z matrix contains non-finite entries")
    w, _ = nnls(z, y, maxiter=50 * z.shape[1] + 100)
    total = w.sum()
    if not total > 0:
        logger.warning("NNLS returned all-zero weights, using uniform weights")
        return np.full(z.shape[1], 1.0 / z.shape[1])
    return w / total


def _log_loss(q, y):
    q = np.clip(q, prob_clip, 1.0 - prob_clip)
    return -float(np.sum(y * np.log(q) + (1.0 - y) * np.log(1.0 - q)))


def meta_nll(z, y):
    """
    Simplex weights minimizing the binomial negative log-likelihood of q = Z w.

    Exponentiated gradient from uniform weights: the log-weights move against the
    gradient with a step that starts at 1 and halves until the loss decreases. The
    search stops when the decrease falls below 1e-10 or after 10 000 iterations.
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(z)) or np.any(z < 0.0) or np.any(z > 1.0):
        raise ValueError("log-likelihood meta-learner needs probabilities in [0, 1]")
    theta = np.zeros(z.shape[1])
    w = softmax(theta)
    loss = _log_loss(z @ w, y)
    step = 1.0
    for _ in range(_eg_max_iter):
        q = np.clip(z @ w, prob_clip, 1.0 - prob_clip)
        gradient = z.T @ ((1.0 - y) / (1.0 - q) - y / q)
        step = min(1.0, 2.0 * step)
        while step > _eg_min_step:
            candidate = theta - step * gradient
            new_w = softmax(candidate)
            new_loss = _log_loss(z @ new_w, y)
            if new_loss < loss:
                break
            step /= 2.0
        else:
            break
        improvement = loss - new_loss
        theta, w, loss = candidate, new_w, new_loss
        if improvement < _eg_tol:
            break
    return w


def _cv_risk(z, y, binary):
    if binary:
        q = np.clip(z, prob_clip, 1.0 - prob_clip)
        return -np.mean(y[:, None] * np.log(q) + (1.0 - y[:, None]) * np.log(1.0 - q), axis=0)
    return np.mean((y[:, None] - z) ** 2, axis=0)


@dataclass
class SLModel:
    """
    A fitted Super Learner.

    Attributes:
        library: the CandidateLibrary
        weights: convex weights, one per candidate
        fitted: per candidate (FeatureSubset or None for a fallback, fitted model) on all rows
        cv_risk: cross-validated MSE (continuous) or mean log-loss (binary) per candidate
        z: the cross-validated prediction matrix
        folds: the FoldAssignment used
        failures: recorded CandidateFailure entries
    """

    library: CandidateLibrary
    weights: np.ndarray
    fitted: list
    cv_risk: np.ndarray
    z: np.ndarray
    folds: object
    binary: bool
    n_features: int
    failures: list = field(default_factory=list)

    def predict(self, x):
        return predict_sl(self, x)

    def summary(self):
        """DataFrame of candidate, screen, learner, cv_risk and weight."""
        return pd.DataFrame(
            {
                "candidate": self.library.names,
                "screen": [screen.name for screen, _ in self.library.candidates],
                "learner": [str(learner) for _, learner in self.library.candidates],
                "cv_risk": self.cv_risk,
                "weight": self.weights,
            }
        )


def fit_superlearner(d, screens, learners, V=5, rng=None, forest_trees=1000, n_jobs=1):
    """
    Fit the Super Learner over screens x learners.

    Args:
        d (Dataset): training data, at least 40 rows
        screens (list): ScreenSpec objects
        learners (list): LearnerSpec objects
        V (int, optional): cross-validation folds. Defaults to 5.
        rng (numpy.random.Generator, optional): generator for folds and candidate seeds
        forest_trees (int, optional): trees of every forest. Defaults to 1000.
        n_jobs (int, optional): joblib workers over folds. Defaults to 1.

    Returns:
        SLModel: weights plus every candidate refit on all rows
    """
    if d.n < min_rows:
        raise ValueError(f"the Super Learner needs at least {min_rows} rows, got {d.n}")
    rng = make_rng(0) if rng is None else rng
    lib = CandidateLibrary.build(screens, learners)
    folds = make_folds(d.n, V, labels=d.y if d.binary else None, rng=rng)
    z, failures = cv_predictions(d, lib, folds, rng, forest_trees=forest_trees, n_jobs=n_jobs)
    weights = meta_nll(z, d.y) if d.binary else meta_nnls(z, d.y)
    _, fitted, refit_failures = _fit_candidates(d, None, lib, child_seed(rng), None, forest_trees)
    model = SLModel(
        library=lib,
        weights=weights,
        fitted=fitted,
        cv_risk=_cv_risk(z, d.y, d.binary),
        z=z,
        folds=folds,
        binary=d.binary,
        n_features=d.p,
        failures=failures + refit_failures,
    )
    logger.debug("fitted %d candidates, %d with nonzero weight", len(lib), int(np.count_nonzero(weights)))
    return model


def predict_sl(m, x):
    """Weighted sum of the candidate predictions, each on its own screened columns."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != m.n_features:
        raise ValueError(f"Super Learner was trained on {m.n_features} columns, got input of shape {x.shape}")
    pred = np.zeros(x.shape[0])
    for weight, (subset, model) in zip(m.weights, m.fitted):
        if weight > 0:
            pred += weight * _candidate_predict(subset, model, x)
    if m.binary:
        pred = np.clip(pred, 0.0, 1.0)
    return pred
