import numpy as np
import pytest

from swfdeembed import Medium


@pytest.fixture(scope="session")
def med():
    return Medium.free_space(1e9)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
