import pandas as pd
import pytest

from src.cli import build_parser, main
from src.version import __version__

config_text = """
[scenarios]
n = [60]
p = [6]
relationship = ["linear"]
strength = ["strong"]
correlation = ["uncorrelated"]
outcome = ["continuous"]

[estimators]
estimators = ["lasso"]
screen_sets = ["none"]

[run]
replicates = 2
master_seed = 3
test_size = 300
oracle_test_size = 5000
record_timing = false
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(config_text)
    return str(path)


def test_version(capsys):
    with pytest.raises(SystemExit) as exit_info:
        build_parser().parse_args(["--version"])
    assert exit_info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_simulate_then_plot_data(tmp_path, config_path):
    results = tmp_path / "out" / "results.csv"
    assert main(["simulate", "--config", config_path, "--out", str(results)]) == 0
    frame = pd.read_csv(results, keep_default_na=False)
    assert len(frame) == 2
    summary = tmp_path / "summary.csv"
    assert main(["plot-data", "--in", str(results), "--out", str(summary)]) == 0
    assert pd.read_csv(summary)["replicates"].tolist() == [2]
    assert main(["table", "--in", str(summary)]) == 0


def test_simulate_is_byte_identical(tmp_path, config_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["--quiet", "simulate", "--config", config_path, "--out", str(first)]) == 0
    assert main(["--quiet", "simulate", "--config", config_path, "--out", str(second), "--workers", "2"]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_oracle(tmp_path, config_path):
    out = tmp_path / "oracles.csv"
    assert main(["oracle", "--config", config_path, "--out", str(out)]) == 0
    table = pd.read_csv(out)
    assert table["metric"].tolist() == ["r_squared"]


def test_generate_matches_benchmark_training_data(tmp_path, config_path):
    out = tmp_path / "data.csv"
    assert main(["generate", "--config", config_path, "--scenario-index", "0", "--with-f", "--out", str(out)]) == 0
    table = pd.read_csv(out)
    assert list(table.columns) == ["x1", "x2", "x3", "x4", "x5", "x6", "y", "f"]
    assert len(table) == 60


def test_config_error_exit_code(tmp_path, config_path):
    assert main(["simulate", "--config", config_path, "--replicates", "0"]) == 1
    assert main(["generate", "--config", config_path, "--scenario-index", "5", "--out", str(tmp_path / "x.csv")]) == 1


def test_io_error_exit_code(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.toml")]) == 2
    assert main(["plot-data", "--in", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "s.csv")]) == 2


def test_timing_flag_records_wall_time(tmp_path, config_path):
    untimed, timed = tmp_path / "untimed.csv", tmp_path / "timed.csv"
    assert main(["--quiet", "simulate", "--config", config_path, "--out", str(untimed)]) == 0
    assert main(["--quiet", "simulate", "--config", config_path, "--out", str(timed), "--timing"]) == 0
    assert (pd.read_csv(untimed)["seconds"] == 0.0).all()
    assert (pd.read_csv(timed)["seconds"] > 0.0).all()
