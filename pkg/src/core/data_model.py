"""
Data Model Module

Tabular datasets shared by the simulation, screening, learning and benchmark code.
It provides:
- Dataset: immutable covariate matrix plus outcome vector with its outcome kind
- FeatureSubset: the output of a screen, a sorted set of column indices
- ColumnScaler: column standardization with exact inversion
- CSV ingestion and writing (numeric tables only)

"""
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

logger = logging.getLogger("data_model")


class DataError(ValueError):
    """Raised when a table or dataset violates the data-model invariants."""


class OutcomeKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


def _readonly(array):
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """Covariate matrix ``x`` (n x p) with outcome vector ``y`` (length n).

    The arrays are copied into column-major float64 storage and marked read-only, so a
    Dataset can be shared freely between workers.

    Args:
        x (array_like): covariates, n rows by p columns.
        y (array_like): outcome, length n.
        outcome_kind (OutcomeKind): continuous or binary (y in {0, 1}).
        columns (tuple, optional): covariate names. Defaults to x1..xp.
    """

    x: np.ndarray
    y: np.ndarray
    outcome_kind: OutcomeKind = OutcomeKind.CONTINUOUS
    columns: tuple = field(default=None)

    def __post_init__(self):
        x = np.array(self.x, dtype=float, order="F", ndmin=2)
        y = np.array(self.y, dtype=float).ravel()
        outcome_kind = OutcomeKind(self.outcome_kind)
        if x.ndim != 2:
            raise DataError(f"x must be a matrix, got {x.ndim} dimensions")
        if x.shape[0] != y.shape[0]:
            raise DataError(f"x has {x.shape[0]} rows but y has length {y.shape[0]}")
        if not np.all(np.isfinite(x)):
            row, col = np.argwhere(~np.isfinite(x))[0]
            raise DataError(f"non-finite covariate at row {row}, column {col}")
        if not np.all(np.isfinite(y)):
            raise DataError(f"non-finite outcome at row {int(np.flatnonzero(~np.isfinite(y))[0])}")
        if outcome_kind is OutcomeKind.BINARY:
            bad = np.flatnonzero((y != 0.0) & (y != 1.0))
            if bad.size:
                raise DataError(f"binary outcome must be 0 or 1, row {int(bad[0])} has {y[bad[0]]}")
        columns = self.columns
        if columns is None:
            columns = tuple(f"x{j + 1}" for j in range(x.shape[1]))
        columns = tuple(str(c) for c in columns)
        if len(columns) != x.shape[1]:
            raise DataError(f"{len(columns)} column names for {x.shape[1]} columns")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "outcome_kind", outcome_kind)
        object.__setattr__(self, "columns", columns)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def binary(self):
        return self.outcome_kind is OutcomeKind.BINARY

    def rows(self, indices):
        """Dataset restricted to the given row indices (used for CV folds)."""
        indices = np.asarray(indices)
        return Dataset(self.x[indices], self.y[indices], self.outcome_kind, self.columns)

    def equals(self, other):
        return (
            isinstance(other, Dataset)
            and self.outcome_kind is other.outcome_kind
            and self.x.shape == other.x.shape
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )


@dataclass(frozen=True)
class FeatureSubset:
    """Sorted, distinct, nonempty list of column indices."""

    indices: tuple

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if not indices:
            raise DataError("a feature subset cannot be empty")
        if any(i < 0 for i in indices):
            raise DataError(f"negative column index in {indices}")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise DataError(f"column indices must be strictly increasing, got {indices}")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_indices(cls, indices):
        """Build a subset from any iterable of indices (sorted and deduplicated)."""
        return cls(tuple(sorted(set(int(i) for i in indices))))

    @classmethod
    def all_columns(cls, p):
        return cls(tuple(range(p)))

    def validate_for(self, p):
        if self.indices[-1] >= p:
            raise DataError(f"column index {self.indices[-1]} out of range for p={p}")
        return self

    def __len__(self):
        return len(self.indices)

    def as_array(self):
        return np.asarray(self.indices, dtype=int)


@dataclass(frozen=True)
class ColumnScaler:
    """Column means and sample standard deviations (n - 1 denominator)."""

    means: np.ndarray
    sds: np.ndarray

    def __post_init__(self):
        if np.any(self.sds <= 0):
            raise DataError("scaler standard deviations must be positive")

    def transform(self, x):
        return (np.asarray(x, dtype=float) - self.means) / self.sds

    def inverse_transform(self, z):
        return np.asarray(z, dtype=float) * self.sds + self.means


def standardize_columns(x):
    """
    Scale every column to sample mean 0 and sample standard deviation 1.

    Args:
        x (array_like): matrix with n >= 2 rows.

    Returns:
        tuple: (standardized matrix, ColumnScaler)
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DataError("standardization needs a matrix with at least 2 rows")
    means = x.mean(axis=0)
    sds = x.std(axis=0, ddof=1)
    constant = np.flatnonzero(~(sds > 0))
    if constant.size:
        raise DataError(f"column {int(constant[0])} is constant and cannot be standardized")
    scaler = ColumnScaler(means=means, sds=sds)
    return scaler.transform(x), scaler


def subset_columns(d, s):
    """Keep the columns of ``s`` (in order); the outcome is unchanged."""
    s.validate_for(d.p)
    idx = s.as_array()
    return Dataset(d.x[:, idx], d.y, d.outcome_kind, tuple(d.columns[i] for i in idx))


def load_csv(path, outcome_column, outcome_kind):
    """
    Load a numeric CSV file into a Dataset.

    Covariates keep the file column order, excluding the outcome column.

    Args:
        path (str): path to a comma-separated file with a header row
        outcome_column (str): name of the outcome column
        outcome_kind (OutcomeKind or str): continuous or binary

    Returns:
        Dataset: the loaded dataset
    """
    outcome_kind = OutcomeKind(outcome_kind)
    table = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    if outcome_column not in table.columns:
        raise DataError(f"outcome column {outcome_column!r} not found in {path}")
    numeric = {}
    for column in table.columns:
        values = pd.to_numeric(table[column].str.strip(), errors="coerce").to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            row = int(bad[0])
            # header is line 1
            raise DataError(
                f"non-numeric value {table[column].iloc[row]!r} at line {row + 2}, column {column!r} of {path}"
            )
        numeric[column] = values
    covariates = [c for c in table.columns if c != outcome_column]
    x = np.column_stack([numeric[c] for c in covariates]) if covariates else np.empty((len(table), 0))
    y = numeric[outcome_column]
    if outcome_kind is OutcomeKind.BINARY:
        bad = np.flatnonzero((y != 0.0) & (y != 1.0))
        if bad.size:
            raise DataError(f"binary outcome {outcome_column!r} has value {y[bad[0]]} at line {int(bad[0]) + 2}")
    logger.debug("loaded %s: n=%d, p=%d", path, x.shape[0], x.shape[1])
    return Dataset(x, y, outcome_kind, tuple(covariates))


def write_csv(d, path, outcome_column="y", extra_columns=None):
    """Write a Dataset as CSV with round-trip float precision."""
    table = pd.DataFrame(np.asarray(d.x), columns=list(d.columns))
    table[outcome_column] = d.y
    for name, values in (extra_columns or {}).items():
        table[name] = values
    table.to_csv(path, index=False, float_format=None)
