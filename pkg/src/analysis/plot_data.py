"""
Summaries of benchmark results for plotting: mean metric, Monte Carlo standard error and
replicate counts per scenario, estimator arm and n, plus a LaTeX table of the means.
"""
import logging

import numpy as np
import pandas as pd

from src.core.data_model import DataError

logger = logging.getLogger("plot_data")

group_columns = ["p", "relationship", "strength", "correlation", "outcome", "estimator", "screen_set", "n", "metric"]
summary_columns = group_columns + ["mean", "se", "replicates", "errors", "single_replicate"]


def _summarise(group):
    values = group["value"]
    ok = values[np.isfinite(values)]
    count = int(ok.shape[0])
    if count >= 2:
        se = float(ok.std(ddof=1) / np.sqrt(count))
    else:
        se = 0.0 if count == 1 else float("nan")
    return pd.Series(
        {
            "mean": float(ok.mean()) if count else float("nan"),
            "se": se,
            "replicates": count,
            "errors": int(values.shape[0] - count),
            "single_replicate": count == 1,
        }
    )


def aggregate_plot_data(records):
    """
    Aggregate benchmark records.

    Failed replicates (NaN value) are excluded from the mean and counted in ``errors``.
    A group with a single replicate gets standard error 0 and ``single_replicate`` set.

    Args:
        records (str or pandas.DataFrame): results CSV path or its DataFrame

    Returns:
        pandas.DataFrame: one row per group, sorted by the group columns
    """
    table = pd.read_csv(records) if isinstance(records, str) else records.copy()
    if table.empty:
        raise DataError("no benchmark records to aggregate")
    missing = [column for column in group_columns + ["value"] if column not in table.columns]
    if missing:
        raise DataError(f"records are missing columns {missing}")
    table["value"] = pd.to_numeric(table["value"], errors="coerce")
    summary = table.groupby(group_columns, sort=True)[["value"]].apply(_summarise).reset_index()
    summary["replicates"] = summary["replicates"].astype(int)
    summary["errors"] = summary["errors"].astype(int)
    summary["single_replicate"] = summary["single_replicate"].astype(bool)
    logger.info("aggregated %d records into %d rows", len(table), len(summary))
    return summary[summary_columns].sort_values(group_columns, kind="stable").reset_index(drop=True)


def summary_table(summary, decimals=4):
    """LaTeX table of the mean metric per scenario and estimator arm, one column per n."""
    wide = summary.pivot_table(
        index=["p", "relationship", "strength", "correlation", "outcome", "estimator", "screen_set"],
        columns="n",
        values="mean",
    )
    wide.columns = [f"n={n}" for n in wide.columns]
    wide = wide.reset_index()
    wide["estimator"] = wide["estimator"].map({"lasso": "Lasso", "sl": "SL", "sl-minus-lasso": "SL (-lasso)"})
    return wide.round(decimals).to_latex(index=False)
