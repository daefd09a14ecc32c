import numpy as np
import pytest

from steklov.geometry import sphere_mesh


@pytest.fixture(scope="session")
def sphere8():
    return sphere_mesh(1.0, 8)


@pytest.fixture(scope="session")
def sphere12():
    return sphere_mesh(1.0, 12)


@pytest.fixture(scope="session")
def sphere16():
    return sphere_mesh(1.0, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
