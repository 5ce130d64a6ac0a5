"""
Prediction-performance measures: R-squared for continuous outcomes, AUC for binary
outcomes, and the oracle (best-possible) performance of the true regression function.
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from src.core.data_model import OutcomeKind
from src.core.simulation import oracle_draws
from src.utils.seeds import make_rng

logger = logging.getLogger("metrics")


class MetricName(str, Enum):
    R_SQUARED = "r_squared"
    AUC = "auc"


@dataclass(frozen=True)
class MetricValue:
    name: MetricName
    value: float


def metric_for(outcome_kind):
    """R-squared for continuous outcomes, AUC for binary ones."""
    return MetricName.AUC if OutcomeKind(outcome_kind) is OutcomeKind.BINARY else MetricName.R_SQUARED


def r_squared(pred, y):
    """
    1 - sum (y - pred)^2 / sum (y - mean(y))^2.

    Can be negative for predictors worse than the mean.
    """
    pred = np.asarray(pred, dtype=float)
    y = np.asarray(y, dtype=float)
    if pred.shape != y.shape or y.shape[0] < 2:
        raise ValueError(f"r_squared needs equal lengths n >= 2, got {pred.shape} and {y.shape}")
    tss = np.sum((y - y.mean()) ** 2)
    if not tss > 0:
        raise ValueError("r_squared is undefined for a constant outcome")
    return float(1.0 - np.sum((y - pred) ** 2) / tss)


def auc(pred, y):
    """
    Area under the ROC curve as the Mann-Whitney statistic.

    Ties between a positive and a negative score count one half (mid-ranks).
    """
    pred = np.asarray(pred, dtype=float)
    y = np.asarray(y, dtype=float)
    if pred.shape != y.shape:
        raise ValueError(f"auc needs equal lengths, got {pred.shape} and {y.shape}")
    positive = y == 1.0
    n_pos = int(np.count_nonzero(positive))
    n_neg = int(np.count_nonzero(y == 0.0))
    if n_pos + n_neg != y.shape[0]:
        raise ValueError("auc needs a 0/1 outcome")
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc needs both classes present")
    ranks = rankdata(pred)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def evaluate(pred, y, outcome_kind):
    """The metric matching the outcome kind."""
    name = metric_for(outcome_kind)
    value = auc(pred, y) if name is MetricName.AUC else r_squared(pred, y)
    return MetricValue(name, value)


def oracle_performance(config, n_test, rng=None):
    """
    Performance of the true regression function on a fresh test draw.

    Continuous: r_squared(f(x), y). Binary: auc(Phi(f(x)), y).

    Args:
        config (ScenarioConfig): scenario (n is ignored)
        n_test (int): size of the test draw
        rng (numpy.random.Generator, optional): generator. Defaults to one seeded with config.seed.

    Returns:
        MetricValue: the oracle metric
    """
    rng = make_rng(config.seed) if rng is None else rng
    f, y = oracle_draws(config, n_test, rng)
    if config.outcome_kind is OutcomeKind.BINARY:
        return evaluate(ndtr(f), y, config.outcome_kind)
    return evaluate(f, y, config.outcome_kind)
