"""
Additive (degree 1) multivariate adaptive regression splines.

Forward pass: starting from the intercept, greedily add the hinge pair
max(0, x_j - t), max(0, t - x_j) that most reduces the residual sum of squares, with
knots t at observed values. Backward pass: drop terms one at a time (least RSS increase)
and keep the subset with the smallest generalized cross-validation score

    GCV = RSS / (n (1 - C(M) / n)^2),  C(M) = M + penalty (M - 1) / 2.

Binary outcomes are fit by least squares on y in {0, 1}; predictions are clipped to [0, 1].
"""
import logging

import numpy as np

from src.learners.base import Learner, LearnerKind, LearnerSpec

logger = logging.getLogger("mars")

gcv_penalty = 2.0
forward_thresh = 0.001
max_knots = 50
_rsq_stop = 0.999
_tiny = 1e-10


def max_terms(p):
    """Term budget before pruning: min(max(21, 2p + 1), 1000)."""
    return min(max(21, 2 * p + 1), 1000)


def gcv(rss, n, n_terms, penalty=gcv_penalty):
    effective = n_terms + penalty * (n_terms - 1) / 2.0
    if effective >= n:
        return np.inf
    return rss / (n * (1.0 - effective / n) ** 2)


def _candidate_knots(xj):
    """Distinct observed values, ends excluded, thinned to at most max_knots by rank."""
    values = np.unique(xj)
    if values.shape[0] <= 2:
        return values[:1]
    inner = values[1:-1] if values.shape[0] > 3 else values[:-1]
    if inner.shape[0] > max_knots:
        picks = np.linspace(0, inner.shape[0] - 1, max_knots).round().astype(int)
        inner = inner[np.unique(picks)]
    return inner


def _hinge(xj, knot, direction):
    return np.maximum(0.0, xj - knot) if direction > 0 else np.maximum(0.0, knot - xj)


def _orthonormal_basis(b):
    q, r = np.linalg.qr(b)
    keep = np.abs(np.diag(r)) > _tiny * max(1.0, np.abs(r).max())
    return q[:, keep]


def _rss(b, y):
    coef, _, _, _ = np.linalg.lstsq(b, y, rcond=None)
    resid = y - b @ coef
    return float(resid @ resid), coef


class Mars(Learner):
    """
    Args:
        nk (int, optional): maximum number of terms (intercept included) before pruning.
            Defaults to max_terms(p).
        penalty (float, optional): GCV cost per knot. Defaults to 2.
        binary (bool, optional): 0/1 outcome, predictions clipped to [0, 1]

    Attributes:
        terms: list of (column, knot, direction) for the kept terms (intercept excluded)
        coef: intercept followed by term coefficients
        gcv_full_, gcv_: GCV of the forward-pass model and of the pruned model
    """

    def __init__(self, nk=None, penalty=gcv_penalty, binary=False):
        super().__init__(binary)
        self.nk = nk
        self.penalty = penalty
        self.terms = []
        self.coef = None
        self.gcv_full_ = None
        self.gcv_ = None

    def _forward(self, x, y, nk):
        n, p = x.shape
        basis = [np.ones(n)]
        terms = []
        tss = float(np.sum((y - y.mean()) ** 2))
        if tss <= 0:
            return basis, terms
        q = _orthonormal_basis(np.column_stack(basis))
        resid = y - q @ (q.T @ y)
        rss = float(resid @ resid)
        knots = [_candidate_knots(x[:, j]) for j in range(p)]
        while len(basis) + 1 <= nk and len(basis) + 2 < n:
            best = (0.0, None, None)
            for j in range(p):
                xj = x[:, j]
                t = knots[j]
                h_plus = np.maximum(0.0, xj[:, None] - t[None, :])
                h_minus = np.maximum(0.0, t[None, :] - xj[:, None])
                h_plus -= q @ (q.T @ h_plus)
                h_minus -= q @ (q.T @ h_minus)
                a11 = np.sum(h_plus * h_plus, axis=0)
                a22 = np.sum(h_minus * h_minus, axis=0)
                a12 = np.sum(h_plus * h_minus, axis=0)
                b1 = h_plus.T @ resid
                b2 = h_minus.T @ resid
                det = a11 * a22 - a12 * a12
                with np.errstate(divide="ignore", invalid="ignore"):
                    pair = (a22 * b1 * b1 - 2 * a12 * b1 * b2 + a11 * b2 * b2) / det
                    single = np.maximum(
                        np.where(a11 > _tiny, b1 * b1 / a11, 0.0), np.where(a22 > _tiny, b2 * b2 / a22, 0.0)
                    )
                scale = np.maximum(a11 * a22, _tiny)
                reduction = np.where(det > _tiny * scale, pair, single)
                reduction = np.nan_to_num(reduction, nan=0.0, posinf=0.0, neginf=0.0)
                k = int(np.argmax(reduction))
                if reduction[k] > best[0]:
                    best = (float(reduction[k]), j, float(t[k]))
            gain, j, knot = best
            if j is None or gain / tss < forward_thresh:
                break
            added = 0
            for direction in (1, -1):
                if len(basis) >= nk:
                    break
                column = _hinge(x[:, j], knot, direction)
                candidate = np.column_stack(basis + [column])
                widened = _orthonormal_basis(candidate)
                if widened.shape[1] > q.shape[1]:
                    basis.append(column)
                    terms.append((j, knot, direction))
                    q = widened
                    added += 1
            if added == 0:
                break
            resid = y - q @ (q.T @ y)
            rss = float(resid @ resid)
            if 1.0 - rss / tss > _rsq_stop:
                break
        return basis, terms

    def _backward(self, basis, terms, y):
        n = y.shape[0]
        kept = list(range(1, len(basis)))
        b = np.column_stack(basis)
        rss, _ = _rss(b, y)
        best_score = gcv(rss, n, len(kept) + 1, self.penalty)
        self.gcv_full_ = best_score
        best_subset = list(kept)
        while kept:
            trial = []
            for term in kept:
                subset = [0] + [t for t in kept if t != term]
                trial.append((_rss(b[:, subset], y)[0], term))
            rss, drop = min(trial)
            kept.remove(drop)
            score = gcv(rss, n, len(kept) + 1, self.penalty)
            if score <= best_score:
                best_score, best_subset = score, list(kept)
        return best_subset, best_score

    def _fit(self, x, y):
        n, p = x.shape
        nk = self.nk if self.nk is not None else max_terms(p)
        basis, terms = self._forward(x, y, nk)
        subset, score = self._backward(basis, terms, y)
        self.terms = [terms[i - 1] for i in subset]
        b = np.column_stack([basis[0]] + [basis[i] for i in subset])
        _, self.coef = _rss(b, y)
        self.gcv_ = score
        logger.debug("forward pass %d terms, pruned to %d (gcv %.4g)", len(terms) + 1, len(subset) + 1, score)

    def basis_matrix(self, x):
        columns = [np.ones(x.shape[0])] + [_hinge(x[:, j], knot, d) for j, knot, d in self.terms]
        return np.column_stack(columns)

    def _predict(self, x):
        return self.basis_matrix(x) @ self.coef


def fit_mars(d, rng=None):
    """Fit MARS with nk = min(max(21, 2p + 1), 1000). ``rng`` is unused (the fit is deterministic)."""
    if d.n < 20:
        raise ValueError(f"MARS needs at least 20 rows, got {d.n}")
    model = Mars(nk=max_terms(d.p), binary=d.binary)
    model.spec = LearnerSpec(LearnerKind.MARS)
    return model.fit(d.x, d.y)
