import numpy as np
import pytest

from src.core.data_model import Dataset, OutcomeKind
from src.learners import Mars, fit_mars
from src.learners.mars import gcv, max_terms
from src.utils.seeds import make_rng


def test_term_budget():
    assert max_terms(10) == 21
    assert max_terms(50) == 101
    assert max_terms(500) == 1000


def test_exact_line_is_reproduced():
    gen = make_rng(50)
    x = gen.standard_normal((100, 3))
    y = 2.0 * x[:, 0] + 1.0
    model = fit_mars(Dataset(x, y), rng=gen)
    pred = model.predict(x)
    assert 1.0 - np.sum((y - pred) ** 2) / np.sum((y - y.mean()) ** 2) > 0.999
    assert {term[0] for term in model.terms} == {0}


def test_constant_outcome_gives_intercept_only():
    gen = make_rng(51)
    model = fit_mars(Dataset(gen.standard_normal((40, 4)), np.full(40, 3.0)))
    assert model.terms == []
    np.testing.assert_allclose(model.predict(gen.standard_normal((5, 4))), 3.0)


def test_hinge_recovered():
    gen = make_rng(52)
    x = gen.uniform(-2, 2, size=(300, 4))
    y = np.maximum(0.0, x[:, 1] - 0.5) + 0.05 * gen.standard_normal(300)
    model = fit_mars(Dataset(x, y))
    assert 1 in {term[0] for term in model.terms}
    assert np.mean((model.predict(x) - np.maximum(0.0, x[:, 1] - 0.5)) ** 2) < 0.01


def test_pruning_does_not_raise_gcv():
    gen = make_rng(53)
    x = gen.standard_normal((120, 6))
    y = np.sin(x[:, 0]) + x[:, 2] + gen.standard_normal(120)
    model = fit_mars(Dataset(x, y))
    assert model.gcv_ <= model.gcv_full_
    assert len(model.terms) + 1 <= max_terms(6)


def test_gcv_formula():
    # M = 3 terms, penalty 2: C = 3 + 2 * 2 / 2 = 5
    assert gcv(10.0, 100, 3) == pytest.approx(10.0 / (100 * (1 - 5 / 100) ** 2))
    assert gcv(1.0, 4, 3) == np.inf


def test_binary_predictions_clipped(binary_dataset):
    model = fit_mars(binary_dataset)
    pred = model.predict(make_rng(54).standard_normal((200, 6)) * 10)
    assert np.all((pred >= 0) & (pred <= 1))
    assert binary_dataset.outcome_kind is OutcomeKind.BINARY


def test_mars_needs_twenty_rows():
    gen = make_rng(55)
    with pytest.raises(ValueError, match="20 rows"):
        fit_mars(Dataset(gen.standard_normal((10, 2)), gen.standard_normal(10)))


def test_small_term_budget():
    gen = make_rng(56)
    x = gen.standard_normal((80, 3))
    y = x[:, 0] ** 2 + x[:, 1]
    model = Mars(nk=3).fit(x, y)
    assert len(model.terms) <= 2
