import numpy as np
import pytest

from lindblad_bounds.backend import SolverSettings


@pytest.fixture(scope="session")
def settings():
    return SolverSettings()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
