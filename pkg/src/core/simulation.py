"""
Simulation Module

Data-generating processes for the screening benchmark:
- coefficient vectors for weak, strong (and null) outcome-covariate relationships
- covariance matrices for the uncorrelated and correlated regimes
- multivariate normal covariates sampled through a Cholesky factor
- linear and nonlinear regression functions
- continuous outcomes (additive standard normal noise) and probit binary outcomes

Key Parameters:
    n (int): training sample size
    p (int): number of covariates, at least 6
    seed (int): 64-bit seed, the whole pipeline is reproducible from it

"""
import logging
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import ndtr

from src.core.data_model import Dataset, OutcomeKind
from src.utils.seeds import make_rng

logger = logging.getLogger("simulation")

_weak_beta = (0.0, 1.0, 0.0, 0.0, 0.0, 1.0)
_strong_beta = (-3.0, -1.0, 1.0, -1.5, -0.5, 0.5)
_active_correlation = {"strong": 0.9, "weak": 0.95, "null": 0.9}
_background_correlation = 0.3
_quarter_pi = np.pi / 4.0


class Relationship(str, Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


class Strength(str, Enum):
    WEAK = "weak"
    STRONG = "strong"
    NULL = "null"


class Correlation(str, Enum):
    UNCORRELATED = "uncorrelated"
    CORRELATED = "correlated"


@dataclass(frozen=True)
class ScenarioConfig:
    """One cell of the simulation design."""

    n: int
    p: int
    relationship: Relationship = Relationship.LINEAR
    strength: Strength = Strength.STRONG
    correlation: Correlation = Correlation.UNCORRELATED
    outcome_kind: OutcomeKind = OutcomeKind.CONTINUOUS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "relationship", Relationship(self.relationship))
        object.__setattr__(self, "strength", Strength(self.strength))
        object.__setattr__(self, "correlation", Correlation(self.correlation))
        object.__setattr__(self, "outcome_kind", OutcomeKind(self.outcome_kind))
        if int(self.p) < 6:
            raise ValueError(f"p must be at least 6 (the nonlinear f uses x1..x6), got {self.p}")
        if int(self.n) < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not 0 <= int(self.seed) < 1 << 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def law_key(self):
        """Canonical key of the data-generating law (everything except n and seed)."""
        return "|".join(
            [
                str(self.p),
                self.relationship.value,
                self.strength.value,
                self.correlation.value,
                self.outcome_kind.value,
            ]
        )

    def key(self):
        return f"{self.n}|{self.law_key()}"

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class BetaVector:
    values: np.ndarray

    @property
    def active_set(self):
        """Indices (0-based) with nonzero coefficient."""
        return tuple(int(j) for j in np.flatnonzero(self.values))


@dataclass(frozen=True)
class CovarianceSpec:
    sigma: np.ndarray
    cholesky_factor: np.ndarray

    @property
    def p(self):
        return self.sigma.shape[0]


def build_beta(strength, p):
    """
    Coefficient vector of the outcome regression, zero-padded to length p.

    Args:
        strength (Strength): weak, strong or null relationship
        p (int): number of covariates, at least 6

    Returns:
        BetaVector: the coefficients
    """
    strength = Strength(strength)
    if p < 6:
        raise ValueError(f"p must be at least 6, got {p}")
    values = np.zeros(p)
    if strength is Strength.WEAK:
        values[:6] = _weak_beta
    elif strength is Strength.STRONG:
        values[:6] = _strong_beta
    return BetaVector(values=values)


def build_sigma(config):
    """
    Covariance matrix of the covariates and its Cholesky factor.

    Uncorrelated: identity. Correlated: unit diagonal, 0.9 (strong) or 0.95 (weak)
    between two active covariates, 0.3 for every other pair.

    Args:
        config (ScenarioConfig): scenario

    Returns:
        CovarianceSpec: sigma and its lower-triangular factor
    """
    p = config.p
    if config.correlation is Correlation.UNCORRELATED:
        sigma = np.eye(p)
    else:
        active = np.zeros(p, dtype=bool)
        active[list(build_beta(config.strength, p).active_set)] = True
        sigma = np.full((p, p), _background_correlation)
        sigma[np.ix_(active, active)] = _active_correlation[config.strength.value]
        np.fill_diagonal(sigma, 1.0)
    try:
        factor = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as e:
        raise ValueError(f"covariance matrix for {config.law_key()} is not positive definite") from e
    return CovarianceSpec(sigma=sigma, cholesky_factor=factor)


def sample_covariates(spec, n, rng):
    """n rows of N(0, sigma): row i is L z_i with z_i iid standard normal."""
    z = rng.standard_normal((n, spec.p))
    return z @ spec.cholesky_factor.T


def regression_function(x, beta, relationship):
    """
    True conditional mean f(x).

    Linear: x . beta. Nonlinear:
    b1 sin(pi/4 x1) + b2 x2 x3 + b3 x3 + b4 cos(pi/4 x4) + b5 x5 x1 + b6 x6.
    The covariates are already N(0, 1) marginally, so the scaling maps c_j are the identity.

    Args:
        x (array_like): one covariate vector (length p) or a matrix of rows
        beta (BetaVector): coefficients
        relationship (Relationship): linear or nonlinear

    Returns:
        float or numpy.ndarray: f(x), a float for a single vector
    """
    relationship = Relationship(relationship)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] < 6:
        raise ValueError(f"regression function needs at least 6 covariates, got {x.shape[1]}")
    b = beta.values
    if relationship is Relationship.LINEAR:
        f = x @ b
    else:
        x1, x2, x3, x4, x5, x6 = (x[:, j] for j in range(6))
        f = (
            b[0] * np.sin(_quarter_pi * x1)
            + b[1] * x2 * x3
            + b[2] * x3
            + b[3] * np.cos(_quarter_pi * x4)
            + b[4] * x5 * x1
            + b[5] * x6
        )
    return float(f[0]) if single else f


def _draw(config, n, rng, beta, spec):
    x = sample_covariates(spec, n, rng)
    f = regression_function(x, beta, config.relationship)
    if config.outcome_kind is OutcomeKind.CONTINUOUS:
        y = f + rng.standard_normal(n)
    else:
        y = (rng.uniform(size=n) < ndtr(f)).astype(float)
    return x, f, y


def generate_dataset(config, rng=None):
    """
    Draw a training dataset of size config.n.

    Continuous: y = f(x) + N(0, 1). Binary: y ~ Bernoulli(Phi(f(x))).

    Args:
        config (ScenarioConfig): scenario
        rng (numpy.random.Generator, optional): generator. Defaults to one seeded with config.seed.

    Returns:
        Dataset: generated data
    """
    rng = make_rng(config.seed) if rng is None else rng
    beta = build_beta(config.strength, config.p)
    x, _, y = _draw(config, config.n, rng, beta, build_sigma(config))
    return Dataset(x, y, config.outcome_kind)


def oracle_test_set(config, n_test, rng=None):
    """
    Large test draw from the same law plus the true f(x) values.

    Returns:
        tuple: (Dataset, numpy.ndarray of f values)
    """
    rng = make_rng(config.seed) if rng is None else rng
    beta = build_beta(config.strength, config.p)
    x, f, y = _draw(config, n_test, rng, beta, build_sigma(config))
    return Dataset(x, y, config.outcome_kind), f


def oracle_draws(config, n_test, rng, chunk_size=100_000):
    """True f values and outcomes only, drawn in chunks to bound memory for huge test sets.

    Returns:
        tuple: (f values, outcomes)
    """
    beta = build_beta(config.strength, config.p)
    spec = build_sigma(config)
    fs, ys = [], []
    remaining = n_test
    while remaining > 0:
        size = min(chunk_size, remaining)
        _, f, y = _draw(config, size, rng, beta, spec)
        fs.append(f)
        ys.append(y)
        remaining -= size
    return np.concatenate(fs), np.concatenate(ys)
