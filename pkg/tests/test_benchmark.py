import math
import os
from dataclasses import replace

import numpy as np
import pytest

from src.core import benchmark
from src.core.benchmark import compute_oracles, record_columns, records_frame, run_benchmark, weights_frame
from src.core.estimators import EstimatorKind, EstimatorSpec, expand_arms
from src.core.run_config import RunConfig


def small_config(**changes):
    config = RunConfig(
        n=(60,),
        p=(6,),
        relationship=("linear",),
        strength=("strong",),
        correlation=("uncorrelated",),
        outcome=("continuous",),
        estimators=("lasso",),
        screen_sets=("none",),
        replicates=3,
        master_seed=11,
        test_size=500,
        oracle_test_size=20_000,
        forest_trees=5,
        record_timing=False,
    )
    return replace(config, **changes)


def test_full_design_has_nine_arms():
    arms = expand_arms(["lasso", "sl", "sl-minus-lasso"], ["none", "lasso", "all", "all-minus-lasso"])
    assert len(arms) == 9
    assert arms[0] == EstimatorSpec(EstimatorKind.LASSO)
    assert str(arms[-1]) == "sl-minus-lasso[all-minus-lasso]"


def test_lasso_arm_ignores_screen_set():
    assert EstimatorSpec("lasso", "all").screen_set.value == "none"


def test_record_count_and_columns():
    records = list(run_benchmark(small_config()))
    assert len(records) == 3
    frame = records_frame(records)
    assert list(frame.columns) == record_columns
    assert frame["rep"].tolist() == [0, 1, 2]
    assert frame["metric"].unique().tolist() == ["r_squared"]
    assert frame["value"].between(0.5, 1.0).all()
    assert (frame["seconds"] == 0.0).all()
    assert (frame["error"] == "").all()
    assert frame["seed"].nunique() == 3


def test_results_do_not_depend_on_workers():
    config = small_config(outcome=("continuous", "binary"), replicates=2)
    one = records_frame(run_benchmark(config))
    two = records_frame(run_benchmark(replace(config, workers=2)))
    assert one.to_csv(index=False) == two.to_csv(index=False)


def test_failure_becomes_nan_row():
    records = list(run_benchmark(small_config(n=(30,), estimators=("sl",), replicates=1)))
    assert len(records) == 1
    assert math.isnan(records[0].value)
    assert "40 rows" in records[0].error


def test_unexpected_exception_does_not_abort_the_sweep(monkeypatch):
    def broken(d, arm, rng, cv_folds=5, forest_trees=1000):
        raise RuntimeError("Maximum number of iterations reached.")

    monkeypatch.setattr(benchmark, "fit_estimator", broken)
    records = list(run_benchmark(small_config(replicates=2)))
    assert len(records) == 2
    assert all(math.isnan(record.value) for record in records)
    assert records[0].error == "RuntimeError: Maximum number of iterations reached."


def test_arms_share_training_data_but_not_fit_seeds():
    config = small_config(estimators=("lasso", "sl"), screen_sets=("none",), n=(30,), replicates=1)
    frame = records_frame(run_benchmark(config))
    assert frame["estimator"].tolist() == ["lasso", "sl"]
    assert frame["seed"].nunique() == 2


@pytest.mark.slow
def test_superlearner_arm_with_weights():
    config = small_config(estimators=("sl-minus-lasso",), screen_sets=("all-minus-lasso",), replicates=1)
    records = list(run_benchmark(config))
    assert np.isfinite(records[0].value)
    weights = weights_frame(records)
    assert len(weights) == 2 * 12
    assert weights["weight"].sum() == pytest.approx(1.0)


def test_oracles_one_value_per_law():
    config = small_config(n=(100, 200), p=(10,), strength=("strong", "null"))
    table = compute_oracles(config)
    assert len(table) == 4
    for _, group in table.groupby("strength"):
        assert group["value"].nunique() == 1
    strong = table.loc[table["strength"] == "strong", "value"].iloc[0]
    assert strong == pytest.approx(13.75 / 14.75, abs=0.01)
    null = table.loc[table["strength"] == "null", "value"].iloc[0]
    assert null == pytest.approx(0.0, abs=0.02)


def test_binary_oracle_in_range():
    table = compute_oracles(small_config(outcome=("binary",)))
    assert 0.5 < table["value"].iloc[0] <= 1.0
    assert table["metric"].iloc[0] == "auc"


def _arm_means(config):
    frame = records_frame(run_benchmark(config))
    assert (frame["error"] == "").all()
    return frame.groupby(["estimator", "screen_set"])["value"].mean()


def _sweep_config(**changes):
    return small_config(
        test_size=5000,
        oracle_test_size=200_000,
        forest_trees=200,
        workers=os.cpu_count() or 1,
        **changes,
    )


@pytest.mark.slow
def test_screens_rescue_the_superlearner_on_a_nonlinear_law():
    config = _sweep_config(
        n=(1000,),
        p=(50,),
        relationship=("nonlinear",),
        correlation=("correlated",),
        estimators=("lasso", "sl"),
        screen_sets=("lasso", "all"),
        replicates=4,
    )
    means = _arm_means(config)
    assert means[("lasso", "none")] <= means[("sl", "all")] - 0.05
    assert means[("sl", "all")] >= means[("sl", "lasso")] - 0.02


@pytest.mark.slow
def test_every_arm_reaches_the_oracle_on_a_linear_law():
    config = _sweep_config(
        n=(2000,),
        p=(10,),
        estimators=("lasso", "sl", "sl-minus-lasso"),
        screen_sets=("none", "lasso", "all", "all-minus-lasso"),
        replicates=3,
    )
    means = _arm_means(config)
    assert len(means) == 9
    oracle = compute_oracles(config)["value"].iloc[0]
    assert oracle == pytest.approx(13.75 / 14.75, abs=0.005)
    for arm, value in means.items():
        assert value == pytest.approx(oracle, abs=0.05), arm


@pytest.mark.slow
def test_binary_superlearner_auc_near_the_oracle():
    config = _sweep_config(
        n=(2000,),
        p=(10,),
        outcome=("binary",),
        estimators=("sl",),
        screen_sets=("all",),
        replicates=3,
    )
    means = _arm_means(config)
    oracle = compute_oracles(config)["value"].iloc[0]
    assert means[("sl", "all")] == pytest.approx(oracle, abs=0.03)
