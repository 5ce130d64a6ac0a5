"""
Command line of the screening benchmark.

    python -m src simulate --config config.toml [--workers K] [--out results.csv]
    python -m src oracle --config config.toml --out oracles.csv
    python -m src plot-data --in results.csv --out summary.csv
    python -m src generate --config config.toml --scenario-index 0 --out data.csv
    python -m src table --in summary.csv

Exit codes: 0 success, 1 configuration or data error, 2 I/O error.
"""
import argparse
import logging
import sys
from pathlib import Path

import pandas as pd

from src.analysis.plot_data import aggregate_plot_data, summary_table
from src.core.benchmark import compute_oracles, records_frame, run_benchmark, weights_frame
from src.core.data_model import write_csv
from src.core.run_config import ConfigError, load_run_config
from src.core.simulation import oracle_test_set
from src.utils.seeds import SeedGen
from src.version import __version__

log_format = "%(levelname)s %(asctime)s - %(message)s"

logger = logging.getLogger("cli")


def _prepare(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _run_overrides(args):
    return {
        "n": args.n,
        "p": args.p,
        "estimators": args.estimators,
        "screen_sets": args.screen_sets,
        "replicates": args.replicates,
        "master_seed": args.master_seed,
        "test_size": args.test_size,
        "cv_folds": args.cv_folds,
        "forest_trees": args.forest_trees,
        "workers": getattr(args, "workers", None),
        "output": getattr(args, "out", None),
        "weights_output": getattr(args, "weights_out", None),
        "record_timing": getattr(args, "timing", None),
    }


def cmd_simulate(args):
    config = load_run_config(args.config, _run_overrides(args))
    records = list(run_benchmark(config))
    output = _prepare(config.output)
    records_frame(records).to_csv(output, index=False)
    failed = sum(1 for record in records if record.error)
    logger.info("wrote %d records (%d failed) to %s", len(records), failed, output)
    if config.weights_output:
        weights_output = _prepare(config.weights_output)
        weights_frame(records).to_csv(weights_output, index=False)
        logger.info("wrote Super Learner weights to %s", weights_output)


def cmd_oracle(args):
    overrides = _run_overrides(args)
    overrides["oracle_test_size"] = args.oracle_test_size
    overrides["oracle_output"] = args.out
    overrides["output"] = None
    config = load_run_config(args.config, overrides)
    table = compute_oracles(config)
    output = _prepare(config.oracle_output)
    table.to_csv(output, index=False)
    logger.info("wrote %d oracle rows to %s", len(table), output)


def cmd_plot_data(args):
    summary = aggregate_plot_data(args.input)
    output = _prepare(args.out)
    summary.to_csv(output, index=False)
    logger.info("wrote %d summary rows to %s", len(summary), output)


def cmd_generate(args):
    overrides = _run_overrides(args)
    overrides["output"] = None
    config = load_run_config(args.config, overrides)
    scenarios = config.scenarios()
    if not 0 <= args.scenario_index < len(scenarios):
        raise ConfigError(f"scenario index {args.scenario_index} out of range (0..{len(scenarios) - 1})")
    scenario = scenarios[args.scenario_index]
    rng = SeedGen(config.master_seed).get_rng(scenario.key(), "data", args.rep)
    dataset, f = oracle_test_set(scenario, scenario.n, rng)
    extra = {"f": f} if args.with_f else None
    output = _prepare(args.out)
    write_csv(dataset, output, extra_columns=extra)
    logger.info("wrote scenario %s, replicate %d to %s", scenario.key(), args.rep, output)


def cmd_table(args):
    print(summary_table(pd.read_csv(args.input)))


def _add_run_options(parser):
    parser.add_argument("--config", default=None, help="TOML run configuration")
    parser.add_argument("--n", type=int, nargs="+", default=None, help="training sample sizes")
    parser.add_argument("--p", type=int, nargs="+", default=None, help="numbers of covariates")
    parser.add_argument("--estimators", nargs="+", default=None, help="lasso, sl, sl-minus-lasso")
    parser.add_argument("--screen-sets", nargs="+", default=None, help="none, lasso, all, all-minus-lasso")
    parser.add_argument("--replicates", type=int, default=None)
    parser.add_argument("--master-seed", type=int, default=None)
    parser.add_argument("--test-size", type=int, default=None)
    parser.add_argument("--cv-folds", type=int, default=None)
    parser.add_argument("--forest-trees", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="slscreen", description="Super Learner screening benchmark")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="run the benchmark and write one record per replicate")
    _add_run_options(simulate)
    simulate.add_argument("--workers", type=int, default=None, help="parallel workers (overrides SLSCREEN_WORKERS)")
    simulate.add_argument("--out", default=None, help="results CSV")
    simulate.add_argument("--weights-out", default=None, help="optional CSV of Super Learner weights")
    simulate.add_argument(
        "--timing", action=argparse.BooleanOptionalAction, default=None, help="record wall time in the seconds column"
    )
    simulate.set_defaults(handler=cmd_simulate)

    oracle = commands.add_parser("oracle", help="best-possible performance per scenario")
    _add_run_options(oracle)
    oracle.add_argument("--oracle-test-size", type=int, default=None)
    oracle.add_argument("--out", default=None, help="oracle CSV")
    oracle.set_defaults(handler=cmd_oracle)

    plot_data = commands.add_parser("plot-data", help="aggregate results for plotting")
    plot_data.add_argument("--in", dest="input", required=True, help="results CSV")
    plot_data.add_argument("--out", required=True, help="summary CSV")
    plot_data.set_defaults(handler=cmd_plot_data)

    generate = commands.add_parser("generate", help="write one generated training dataset")
    _add_run_options(generate)
    generate.add_argument("--scenario-index", type=int, required=True, help="index into the scenario grid")
    generate.add_argument("--rep", type=int, default=0, help="replicate number")
    generate.add_argument("--with-f", action="store_true", help="add the true regression function as column f")
    generate.add_argument("--out", required=True, help="dataset CSV")
    generate.set_defaults(handler=cmd_generate)

    table = commands.add_parser("table", help="print a LaTeX table of a summary CSV")
    table.add_argument("--in", dest="input", required=True, help="summary CSV from plot-data")
    table.set_defaults(handler=cmd_table)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(stream=sys.stdout, format=log_format, level=level)
    try:
        args.handler(args)
    except ValueError as e:
        logger.error("%s", e)
        return 1
    except OSError as e:
        logger.error("%s", e)
        return 2
    return 0
