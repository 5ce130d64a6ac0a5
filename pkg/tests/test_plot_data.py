import numpy as np
import pandas as pd
import pytest

from src.analysis.plot_data import aggregate_plot_data, summary_columns, summary_table
from src.core.benchmark import record_columns
from src.core.data_model import DataError


def _records(values, n=200, estimator="sl", screen_set="all"):
    scenario = [n, 10, "linear", "strong", "uncorrelated", "continuous"]
    rows = [
        dict(zip(record_columns, scenario + [estimator, screen_set, rep, rep, "r_squared", value, 0.0, ""]))
        for rep, value in enumerate(values)
    ]
    return pd.DataFrame(rows, columns=record_columns)


def test_mean_and_standard_error():
    summary = aggregate_plot_data(_records([0.1, 0.2, 0.3]))
    assert list(summary.columns) == summary_columns
    row = summary.iloc[0]
    assert row["mean"] == pytest.approx(0.2)
    assert row["se"] == pytest.approx(0.0577, abs=1e-4)
    assert row["replicates"] == 3
    assert not row["single_replicate"]


def test_single_replicate_flagged():
    row = aggregate_plot_data(_records([0.4])).iloc[0]
    assert row["se"] == 0.0
    assert row["single_replicate"]


def test_nan_rows_counted_as_errors():
    row = aggregate_plot_data(_records([0.1, np.nan, 0.3])).iloc[0]
    assert row["mean"] == pytest.approx(0.2)
    assert row["replicates"] == 2
    assert row["errors"] == 1


def test_rows_sorted_by_group():
    records = pd.concat([_records([0.5], n=500), _records([0.3], n=200, estimator="lasso", screen_set="none")])
    summary = aggregate_plot_data(records)
    assert summary["estimator"].tolist() == ["lasso", "sl"]


def test_reads_csv(tmp_path):
    path = tmp_path / "results.csv"
    _records([0.1, 0.2]).to_csv(path, index=False)
    assert len(aggregate_plot_data(str(path))) == 1


def test_empty_input():
    with pytest.raises(DataError):
        aggregate_plot_data(pd.DataFrame(columns=record_columns))


def test_latex_table():
    summary = aggregate_plot_data(pd.concat([_records([0.5, 0.7], n=200), _records([0.8], n=500)]))
    latex = summary_table(summary)
    assert "\\begin{tabular}" in latex
    assert "n=200" in latex and "n=500" in latex
    assert "0.6" in latex
