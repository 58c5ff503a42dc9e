import numpy as np
import pytest

from nicd import from_ltf, majority

F_WEIGHTS = (1, -3, 1, -1, 3)


@pytest.fixture(scope="session")
def f5():
    return from_ltf(F_WEIGHTS)


@pytest.fixture(scope="session")
def maj5():
    return majority(5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)
