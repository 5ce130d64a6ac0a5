"""
Benchmark Module

Runs the simulation study: every scenario x estimator arm x replicate is an independent
task that generates a training set, fits the estimator, and scores it on an independent
test draw of the same law.

Seeds:
- training and test data: derived from "scenario|data|rep|master_seed", so every arm of
  a replicate sees the same datasets
- estimator fit: derived from "scenario|estimator|screen_set|rep|master_seed"

Results are sorted by their key before writing, so output files do not depend on the
number of workers.

"""
import logging
import time
from dataclasses import asdict, dataclass, field
from itertools import groupby

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from src.core.estimators import expand_arms, fit_estimator
from src.core.metrics import evaluate, metric_for, oracle_performance
from src.core.simulation import generate_dataset, oracle_test_set
from src.utils.seeds import SeedGen, make_rng

logger = logging.getLogger("benchmark")

record_columns = [
    "n",
    "p",
    "relationship",
    "strength",
    "correlation",
    "outcome",
    "estimator",
    "screen_set",
    "rep",
    "seed",
    "metric",
    "value",
    "seconds",
    "error",
]
scenario_columns = record_columns[:6]
weight_columns = scenario_columns + ["estimator", "screen_set", "rep", "candidate", "weight", "cv_risk"]


@dataclass
class BenchRecord:
    n: int
    p: int
    relationship: str
    strength: str
    correlation: str
    outcome: str
    estimator: str
    screen_set: str
    rep: int
    seed: int
    metric: str
    value: float
    seconds: float
    error: str = ""
    weights: list = field(default=None, repr=False)

    def as_row(self):
        row = asdict(self)
        row.pop("weights")
        return row

    @property
    def sort_key(self):
        return tuple(getattr(self, column) for column in record_columns[:9])


def _scenario_fields(scenario):
    return {
        "n": scenario.n,
        "p": scenario.p,
        "relationship": scenario.relationship.value,
        "strength": scenario.strength.value,
        "correlation": scenario.correlation.value,
        "outcome": scenario.outcome_kind.value,
    }


def run_replicate(scenario, arm, rep, seeds, config):
    """Fit and score one arm on one replicate; failures become NaN records."""
    data_seed = seeds.get_single_seed(scenario.key(), "data", rep)
    fit_seed = seeds.get_single_seed(scenario.key(), arm.kind.value, arm.screen_set.value, rep)
    metric = metric_for(scenario.outcome_kind)
    record = BenchRecord(
        **_scenario_fields(scenario),
        estimator=arm.kind.value,
        screen_set=arm.screen_set.value,
        rep=rep,
        seed=fit_seed,
        metric=metric.value,
        value=float("nan"),
        seconds=0.0,
    )
    start = time.perf_counter()
    try:
        data_rng = make_rng(data_seed)
        train = generate_dataset(scenario, data_rng)
        test, _ = oracle_test_set(scenario, config.test_size, data_rng)
        model = fit_estimator(
            train, arm, make_rng(fit_seed), cv_folds=config.cv_folds, forest_trees=config.forest_trees
        )
        record.value = evaluate(model.predict(test.x), test.y, scenario.outcome_kind).value
        if hasattr(model, "summary"):
            record.weights = model.summary()[["candidate", "weight", "cv_risk"]].to_dict("records")
    except Exception as e:
        logger.warning("replicate %d of %s with %s failed: %s", rep, scenario.key(), arm, e)
        record.error = f"{type(e).__name__}: {e}"
    if config.record_timing:
        record.seconds = time.perf_counter() - start
    return record


def run_benchmark(config):
    """
    Run every scenario x estimator arm x replicate task of ``config``.

    Args:
        config (RunConfig): the run configuration

    Yields:
        BenchRecord: one record per task, in completion order of the workers
    """
    seeds = SeedGen(config.master_seed)
    arms = expand_arms(config.estimators, config.screen_sets)
    tasks = [
        (scenario, arm, rep) for scenario in config.scenarios() for arm in arms for rep in range(config.replicates)
    ]
    logger.info("%d tasks on %d worker(s)", len(tasks), config.workers)
    records = Parallel(n_jobs=config.workers, return_as="generator")(
        delayed(run_replicate)(scenario, arm, rep, seeds, config) for scenario, arm, rep in tasks
    )
    for record in tqdm(iterable=records, total=len(tasks), desc="Simulation process"):
        yield record


def records_frame(records):
    """Records as a DataFrame in the fixed column order, sorted by key."""
    records = sorted(records, key=lambda record: record.sort_key)
    return pd.DataFrame([record.as_row() for record in records], columns=record_columns)


def weights_frame(records):
    rows = []
    for record in sorted(records, key=lambda record: record.sort_key):
        for entry in record.weights or []:
            rows.append(
                {
                    **{column: getattr(record, column) for column in scenario_columns},
                    "estimator": record.estimator,
                    "screen_set": record.screen_set,
                    "rep": record.rep,
                    **entry,
                }
            )
    return pd.DataFrame(rows, columns=weight_columns)


def compute_oracles(config):
    """
    Oracle metric for every scenario of ``config``.

    One test set of size oracle_test_size is drawn per law (scenario without n); all
    scenarios sharing the law get the same value.

    Returns:
        pandas.DataFrame: scenario columns plus metric and value
    """
    scenarios = sorted(config.scenarios(), key=lambda scenario: scenario.law_key())
    seeds = SeedGen(config.master_seed)
    rows = []
    laws = [(law, list(group)) for law, group in groupby(scenarios, key=lambda scenario: scenario.law_key())]
    for law, group in tqdm(iterable=laws, desc="Oracle process"):
        rng = seeds.get_rng("oracle", law)
        oracle = oracle_performance(group[0], config.oracle_test_size, rng)
        logger.debug("oracle %s for %s: %.4f", oracle.name.value, law, oracle.value)
        for scenario in group:
            rows.append({**_scenario_fields(scenario), "metric": oracle.name.value, "value": oracle.value})
    table = pd.DataFrame(rows, columns=scenario_columns + ["metric", "value"])
    return table.sort_values(scenario_columns, kind="stable").reset_index(drop=True)
