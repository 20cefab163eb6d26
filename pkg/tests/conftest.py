import numpy as np
import pytest

from pharmonious import RadiusField, interval_grid, square_grid


@pytest.fixture(scope="session")
def grid1d():
    """Dyadic 1D grid on [0,1], h = 1/256."""
    return interval_grid(257)


@pytest.fixture(scope="session")
def grid1d_rho(grid1d):
    return RadiusField.scaled_boundary_distance(grid1d, 0.4)


@pytest.fixture(scope="session")
def grid2d_small():
    """33x33 grid on [0,1]^2, h = 1/32."""
    return square_grid(33)


@pytest.fixture(scope="session")
def grid2d_65():
    return square_grid(65)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
