import numpy as np
import pytest

from src.core.data_model import Dataset, OutcomeKind
from src.utils.seeds import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def linear_dataset():
    """n=200, p=10; y = 2 x0 - x1 + N(0, 0.5^2)."""
    gen = make_rng(7)
    x = gen.standard_normal((200, 10))
    y = 2.0 * x[:, 0] - x[:, 1] + 0.5 * gen.standard_normal(200)
    return Dataset(x, y, OutcomeKind.CONTINUOUS)


@pytest.fixture
def binary_dataset():
    """n=300, p=6; logistic in x0."""
    gen = make_rng(11)
    x = gen.standard_normal((300, 6))
    prob = 1.0 / (1.0 + np.exp(-2.0 * x[:, 0]))
    y = (gen.uniform(size=300) < prob).astype(float)
    return Dataset(x, y, OutcomeKind.BINARY)
