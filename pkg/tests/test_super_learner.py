import itertools

import numpy as np
import pytest
from scipy.optimize import lsq_linear

from src.core import super_learner
from src.core.data_model import Dataset
from src.core.folds import make_folds
from src.core.screens import ScreenKind, ScreenSpec, all_vars, expand_screen_set
from src.core.super_learner import (
    CandidateLibrary,
    cv_predictions,
    fit_superlearner,
    meta_nll,
    meta_nnls,
    predict_sl,
)
from src.learners import LearnerSpec, learner_grid
from src.utils.seeds import make_rng

lasso = LearnerSpec("lasso")
mars = LearnerSpec("mars")
univar = ScreenSpec(ScreenKind.UNIVAR_COR_P, threshold=0.2)


def _nll(z, y, w):
    q = np.clip(z @ w, 1e-6, 1 - 1e-6)
    return -np.sum(y * np.log(q) + (1 - y) * np.log(1 - q))


def test_library_is_screen_major():
    lib = CandidateLibrary.build([all_vars, univar], [lasso, mars])
    assert lib.names == ["all/lasso", "all/mars", "univar_cor_p0.2/lasso", "univar_cor_p0.2/mars"]
    assert lib.screens == [all_vars, univar]


def test_full_design_has_117_candidates():
    assert len(learner_grid()) == 13
    assert len(learner_grid(include_lasso=False)) == 12
    assert len(CandidateLibrary.build(expand_screen_set("all", 50), learner_grid())) == 117


def test_nnls_recovers_exact_column():
    gen = make_rng(60)
    y = gen.standard_normal(100)
    z = np.column_stack([gen.standard_normal(100), y, gen.standard_normal(100)])
    np.testing.assert_allclose(meta_nnls(z, y), [0.0, 1.0, 0.0], atol=1e-6)


def test_nnls_single_column_and_negative_column():
    gen = make_rng(61)
    y = gen.standard_normal(50)
    np.testing.assert_allclose(meta_nnls((2 * y)[:, None], y), [1.0])
    np.testing.assert_allclose(meta_nnls(np.column_stack([y, -y]), y), [1.0, 0.0], atol=1e-12)


def test_nnls_zero_solution_gives_uniform_weights():
    y = np.ones(10)
    z = -np.ones((10, 3))
    np.testing.assert_allclose(meta_nnls(z, y), [1 / 3, 1 / 3, 1 / 3])


def test_nnls_matches_reference_solver():
    gen = make_rng(62)
    for _ in range(200):
        z = gen.standard_normal((200, 5))
        y = z @ gen.uniform(-0.5, 1.0, size=5) + gen.standard_normal(200)
        reference = lsq_linear(z, y, bounds=(0, np.inf), method="bvls", tol=1e-12).x
        if reference.sum() <= 1e-8:
            continue
        np.testing.assert_allclose(meta_nnls(z, y), reference / reference.sum(), atol=1e-6)


def test_nll_prefers_true_probability():
    gen = make_rng(63)
    x = gen.standard_normal(5000)
    prob = 1 / (1 + np.exp(-2 * x))
    y = (gen.uniform(size=5000) < prob).astype(float)
    w = meta_nll(np.column_stack([prob, np.full(5000, 0.5)]), y)
    assert w[0] >= 0.95
    assert w.sum() == pytest.approx(1.0, abs=1e-8)


def test_nll_beats_simplex_grid():
    gen = make_rng(64)
    for _ in range(5):
        n = 200
        truth = gen.uniform(0.05, 0.95, size=n)
        y = (gen.uniform(size=n) < truth).astype(float)
        z = np.column_stack(
            [
                np.clip(truth + 0.2 * gen.standard_normal(n), 0, 1),
                np.clip(truth + 0.3 * gen.standard_normal(n), 0, 1),
                gen.uniform(size=n),
            ]
        )
        w = meta_nll(z, y)
        assert np.all(w >= 0) and w.sum() == pytest.approx(1.0, abs=1e-8)
        grid = np.linspace(0, 1, 101)
        best = min(_nll(z, y, np.array([a, b, 1 - a - b])) for a, b in itertools.product(grid, grid) if a + b <= 1)
        assert _nll(z, y, w) <= best + 1e-6
        for vertex in np.eye(3):
            assert _nll(z, y, w) <= _nll(z, y, vertex) + 1e-9
        assert _nll(z, y, w) <= _nll(z, y, np.full(3, 1 / 3)) + 1e-9


def test_nll_identical_columns():
    gen = make_rng(65)
    column = gen.uniform(size=40)
    y = (gen.uniform(size=40) < column).astype(float)
    z = np.column_stack([column, column, column])
    np.testing.assert_allclose(z @ meta_nll(z, y), column)
    np.testing.assert_allclose(meta_nll(column[:, None], y), [1.0])


def test_nll_rejects_non_probabilities():
    with pytest.raises(ValueError):
        meta_nll(np.array([[1.5], [0.2]]), np.array([1.0, 0.0]))


def _two_candidate_library():
    return CandidateLibrary.build([all_vars], [mars, LearnerSpec("rf", min_node_size=5)])


def _leakage_data(n=50):
    gen = make_rng(66)
    x = gen.standard_normal((n, 3))
    return Dataset(x, x[:, 0] + gen.standard_normal(n))


def _check_rows(d, rows):
    lib = _two_candidate_library()
    folds = make_folds(d.n, 5, rng=make_rng(1))
    z, _ = cv_predictions(d, lib, folds, make_rng(2), forest_trees=5)
    for i in rows:
        y = d.y.copy()
        y[i] += 10.0
        perturbed, _ = cv_predictions(Dataset(d.x, y), lib, folds, make_rng(2), forest_trees=5)
        np.testing.assert_array_equal(perturbed[i], z[i])


def test_no_leakage_sample_rows():
    _check_rows(_leakage_data(), [0, 17, 49])


@pytest.mark.slow
def test_no_leakage_every_row():
    d = _leakage_data()
    _check_rows(d, range(d.n))


def test_cv_predictions_deterministic(linear_dataset):
    lib = CandidateLibrary.build([all_vars, univar], [mars])
    folds = make_folds(linear_dataset.n, 5, rng=make_rng(3))
    first, _ = cv_predictions(linear_dataset, lib, folds, make_rng(4))
    second, _ = cv_predictions(linear_dataset, lib, folds, make_rng(4), n_jobs=2)
    np.testing.assert_array_equal(first, second)


def test_single_candidate_gets_full_weight(linear_dataset):
    model = fit_superlearner(linear_dataset, [all_vars], [lasso], rng=make_rng(5))
    np.testing.assert_allclose(model.weights, [1.0])
    np.testing.assert_allclose(predict_sl(model, linear_dataset.x), model.fitted[0][1].predict(linear_dataset.x))


def test_superlearner_properties(linear_dataset):
    model = fit_superlearner(linear_dataset, [all_vars, univar], [lasso, mars], rng=make_rng(6))
    assert np.all(model.weights >= 0)
    assert model.weights.sum() == pytest.approx(1.0, abs=1e-8)
    ensemble_risk = np.mean((linear_dataset.y - model.z @ model.weights) ** 2)
    assert ensemble_risk <= 1.01 * model.cv_risk.min()
    x = make_rng(7).standard_normal((50, 10))
    candidates = np.column_stack([super_learner._candidate_predict(s, m, x) for s, m in model.fitted])
    pred = model.predict(x)
    assert np.all(pred >= candidates.min(axis=1) - 1e-10)
    assert np.all(pred <= candidates.max(axis=1) + 1e-10)
    summary = model.summary()
    assert list(summary.columns) == ["candidate", "screen", "learner", "cv_risk", "weight"]
    assert len(summary) == 4


def test_true_model_learner_dominates(linear_dataset):
    model = fit_superlearner(linear_dataset, [all_vars], [lasso, LearnerSpec("gbt", n_trees=100, shrinkage=0.01)])
    ensemble_risk = np.mean((linear_dataset.y - model.z @ model.weights) ** 2)
    assert ensemble_risk <= 1.01 * model.cv_risk[0]


def test_binary_superlearner(binary_dataset):
    model = fit_superlearner(
        binary_dataset, [all_vars], [lasso, LearnerSpec("gbt", n_trees=100, shrinkage=0.1)], rng=make_rng(8)
    )
    assert np.all((model.z >= 0) & (model.z <= 1))
    assert model.weights.sum() == pytest.approx(1.0, abs=1e-8)
    sizes = [np.bincount(model.folds.fold_of[binary_dataset.y == c], minlength=5) for c in (0, 1)]
    assert all(s.max() - s.min() <= 1 for s in sizes)
    pred = model.predict(make_rng(9).standard_normal((30, 6)))
    assert np.all((pred >= 0) & (pred <= 1))


@pytest.mark.parametrize("error", [ValueError, RuntimeError, IndexError])
def test_failed_candidate_falls_back_to_mean(linear_dataset, monkeypatch, error):
    original = super_learner.fit_learner

    def flaky(d, spec, rng=None, forest_trees=1000):
        if spec == mars:
            raise error("boom")
        return original(d, spec, rng, forest_trees=forest_trees)

    monkeypatch.setattr(super_learner, "fit_learner", flaky)
    model = fit_superlearner(linear_dataset, [all_vars], [lasso, mars], rng=make_rng(10))
    assert len(model.failures) == 6
    assert {failure.candidate for failure in model.failures} == {"all/mars"}
    assert model.failures[-1].fold is None
    for v in range(5):
        train, test = model.folds.train_test(v)
        np.testing.assert_allclose(model.z[test, 1], linear_dataset.y[train].mean())


def test_failed_screen_drops_only_its_candidates(linear_dataset, monkeypatch):
    original = super_learner.fit_screen

    def broken(d, spec, rng=None, forest_trees=1000):
        if spec == univar:
            raise RuntimeError("Maximum number of iterations reached.")
        return original(d, spec, rng, forest_trees)

    monkeypatch.setattr(super_learner, "fit_screen", broken)
    model = fit_superlearner(linear_dataset, [all_vars, univar], [lasso], rng=make_rng(13))
    assert {failure.candidate for failure in model.failures} == {"univar_cor_p0.2/lasso"}
    assert len(model.failures) == 6
    assert np.all(np.isfinite(model.predict(linear_dataset.x)))


def test_superlearner_needs_forty_rows():
    gen = make_rng(11)
    d = Dataset(gen.standard_normal((39, 3)), gen.standard_normal(39))
    with pytest.raises(ValueError, match="40 rows"):
        fit_superlearner(d, [all_vars], [lasso])


def test_predict_sl_rejects_wrong_width(linear_dataset):
    model = fit_superlearner(linear_dataset, [all_vars], [mars], rng=make_rng(12))
    with pytest.raises(ValueError, match="10 columns"):
        predict_sl(model, np.zeros((2, 3)))
