import numpy as np
import pytest

from hypflux import bolza, enumerate_classes, make_bump


@pytest.fixture(scope="session")
def gens():
    return bolza()


@pytest.fixture(scope="session")
def spec6(gens):
    return enumerate_classes(gens, 6.0)


@pytest.fixture(scope="session")
def spec12(gens):
    return enumerate_classes(gens, 12.0, workers=4)


@pytest.fixture(scope="session")
def bump():
    return make_bump(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
