"""
Run Configuration Module

Reads the benchmark configuration from a TOML file with three tables:
- [scenarios]: lists of n, p, relationship, strength, correlation and outcome values;
  the scenario grid is their Cartesian product
- [estimators]: estimator kinds and screen sets to compare
- [run]: replicates, seeds, test sizes, parallelism and output paths

Precedence of a value: command-line override > environment (worker count only,
SLSCREEN_WORKERS) > file > built-in default.

"""
import logging
import os
from dataclasses import dataclass, fields, replace
from itertools import product

from tomlkit import load as toml_load

from src.core.data_model import OutcomeKind
from src.core.estimators import EstimatorKind
from src.core.screens import ScreenSetName
from src.core.simulation import Correlation, Relationship, ScenarioConfig, Strength

logger = logging.getLogger("run_config")

workers_env = "SLSCREEN_WORKERS"


class ConfigError(ValueError):
    """Raised for unknown keys, wrong types or invalid values in a run configuration."""


@dataclass(frozen=True)
class RunConfig:
    n: tuple = (200, 500, 1000)
    p: tuple = (10, 50)
    relationship: tuple = ("linear", "nonlinear")
    strength: tuple = ("strong", "weak")
    correlation: tuple = ("uncorrelated", "correlated")
    outcome: tuple = ("continuous", "binary")
    estimators: tuple = ("lasso", "sl", "sl-minus-lasso")
    screen_sets: tuple = ("none", "lasso", "all", "all-minus-lasso")
    replicates: int = 50
    master_seed: int = 20240917
    test_size: int = 10_000
    oracle_test_size: int = 1_000_000
    cv_folds: int = 5
    forest_trees: int = 1000
    workers: int = 1
    output: str = "results/results.csv"
    oracle_output: str = "results/oracles.csv"
    weights_output: str = None
    record_timing: bool = False
    title: str = ""

    def scenarios(self):
        """Every ScenarioConfig of the grid, in n, p, relationship, strength, correlation, outcome order."""
        return [
            ScenarioConfig(n, p, relationship, strength, correlation, outcome)
            for n, p, relationship, strength, correlation, outcome in product(
                self.n, self.p, self.relationship, self.strength, self.correlation, self.outcome
            )
        ]


_sections = {
    "scenarios": ("n", "p", "relationship", "strength", "correlation", "outcome"),
    "estimators": ("estimators", "screen_sets"),
    "run": (
        "replicates",
        "master_seed",
        "test_size",
        "oracle_test_size",
        "cv_folds",
        "forest_trees",
        "workers",
        "output",
        "oracle_output",
        "weights_output",
        "record_timing",
    ),
}

_enum_lists = {
    "relationship": Relationship,
    "strength": Strength,
    "correlation": Correlation,
    "outcome": OutcomeKind,
    "estimators": EstimatorKind,
    "screen_sets": ScreenSetName,
}

_minimum = {
    "replicates": 1,
    "master_seed": 0,
    "test_size": 2,
    "oracle_test_size": 2,
    "cv_folds": 2,
    "forest_trees": 1,
    "workers": 1,
}

_paths = ("output", "oracle_output", "weights_output")


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _check_value(key, value):
    """Validate one key and return it in RunConfig form."""
    if key in ("n", "p"):
        values = value if isinstance(value, (list, tuple)) else [value]
        least = 2 if key == "n" else 6
        if not values or not all(_is_int(v) and v >= least for v in values):
            raise ConfigError(f"{key} must be a nonempty list of integers >= {least}, got {value!r}")
        return tuple(int(v) for v in values)
    if key in _enum_lists:
        values = value if isinstance(value, (list, tuple)) else [value]
        enum = _enum_lists[key]
        if not values:
            raise ConfigError(f"{key} must not be empty")
        try:
            return tuple(enum(str(v)).value for v in values)
        except ValueError:
            allowed = ", ".join(member.value for member in enum)
            raise ConfigError(f"invalid value in {key}: {value!r} (allowed: {allowed})") from None
    if key in _minimum:
        if not _is_int(value) or value < _minimum[key]:
            raise ConfigError(f"{key} must be an integer >= {_minimum[key]}, got {value!r}")
        return int(value)
    if key == "record_timing":
        if not isinstance(value, bool):
            raise ConfigError(f"record_timing must be true or false, got {value!r}")
        return value
    if key in _paths:
        if value is None and key == "weights_output":
            return None
        if not isinstance(value, str) or not value:
            raise ConfigError(f"{key} must be a nonempty path, got {value!r}")
        return value
    if key == "title":
        return str(value)
    raise ConfigError(f"unknown configuration key {key!r}")


def _flatten(document):
    flat = {}
    for name, table in document.items():
        if name == "title":
            flat["title"] = table
            continue
        if name not in _sections:
            raise ConfigError(f"unknown configuration table [{name}]")
        if not isinstance(table, dict):
            raise ConfigError(f"[{name}] must be a table")
        for key, value in table.items():
            if key not in _sections[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            flat[key] = value
    return flat


def load_run_config(path=None, overrides=None, environ=None):
    """
    Build a RunConfig from a TOML file, the environment and command-line overrides.

    Args:
        path (str, optional): TOML file; built-in defaults only when None
        overrides (dict, optional): key -> value from the command line (None values ignored)
        environ (Mapping, optional): environment. Defaults to os.environ.

    Returns:
        RunConfig: the validated configuration
    """
    environ = os.environ if environ is None else environ
    values = {}
    if path is not None:
        with open(path) as file_:
            document = toml_load(file_).unwrap()
        values.update(_flatten(document))
        logger.debug("loaded configuration %s", path)
    if environ.get(workers_env):
        try:
            values["workers"] = int(environ[workers_env])
        except ValueError:
            raise ConfigError(f"{workers_env} must be an integer, got {environ[workers_env]!r}") from None
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    known = {f.name for f in fields(RunConfig)}
    checked = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        checked[key] = _check_value(key, value)
    return replace(RunConfig(), **checked)
