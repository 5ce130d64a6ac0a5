import numpy as np
import pytest

from src.core.data_model import (
    DataError,
    Dataset,
    FeatureSubset,
    OutcomeKind,
    load_csv,
    standardize_columns,
    subset_columns,
    write_csv,
)


def test_dataset_rejects_mismatched_lengths():
    with pytest.raises(DataError, match="rows"):
        Dataset(np.zeros((3, 2)), np.zeros(4))


def test_dataset_rejects_non_finite():
    x = np.zeros((3, 2))
    x[1, 1] = np.nan
    with pytest.raises(DataError, match="row 1, column 1"):
        Dataset(x, np.zeros(3))


def test_binary_outcome_must_be_zero_one():
    with pytest.raises(DataError, match="0 or 1"):
        Dataset(np.zeros((3, 1)), [0.0, 1.0, 0.5], OutcomeKind.BINARY)


def test_dataset_is_read_only():
    d = Dataset(np.ones((2, 2)), [1.0, 2.0])
    with pytest.raises(ValueError):
        d.x[0, 0] = 5.0
    assert d.columns == ("x1", "x2")


def test_feature_subset_invariants():
    assert FeatureSubset.from_indices([3, 1, 3]).indices == (1, 3)
    with pytest.raises(DataError):
        FeatureSubset(())
    with pytest.raises(DataError):
        FeatureSubset((2, 1))
    with pytest.raises(DataError):
        FeatureSubset((0, 5)).validate_for(5)


def test_standardize_columns():
    x = np.array([[1.0, 10.0], [2.0, 20.0], [3.0, 60.0]])
    z, scaler = standardize_columns(x)
    np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(z.std(axis=0, ddof=1), 1.0)
    np.testing.assert_allclose(scaler.inverse_transform(z), x, rtol=1e-12)


def test_standardize_constant_column_names_it():
    with pytest.raises(DataError, match="column 1"):
        standardize_columns(np.array([[1.0, 2.0], [3.0, 2.0]]))


def test_subset_columns_all_is_identity(linear_dataset):
    same = subset_columns(linear_dataset, FeatureSubset.all_columns(linear_dataset.p))
    assert same.equals(linear_dataset)
    picked = subset_columns(linear_dataset, FeatureSubset((0, 4)))
    assert picked.columns == ("x1", "x5")
    np.testing.assert_array_equal(picked.x, linear_dataset.x[:, [0, 4]])


def test_csv_round_trip(tmp_path, linear_dataset):
    path = tmp_path / "data.csv"
    write_csv(linear_dataset, path)
    loaded = load_csv(path, "y", OutcomeKind.CONTINUOUS)
    assert loaded.equals(linear_dataset)
    assert loaded.columns == linear_dataset.columns


def test_load_csv_names_bad_line_and_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,y\n1,2,3\n4,oops,6\n")
    with pytest.raises(DataError, match=r"line 3, column 'b'"):
        load_csv(path, "y", "continuous")


def test_load_csv_missing_outcome(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(DataError, match="outcome column"):
        load_csv(path, "y", "continuous")
