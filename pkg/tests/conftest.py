import numpy as np
import pytest

from lambdafield import GridGeometry, LambdaGrid, SensorModel


@pytest.fixture
def geometry():
    return GridGeometry(0.0, 0.0, 0.1, 40, 40)


@pytest.fixture
def sensor():
    return SensorModel(p_hit=0.99, p_miss=0.9999, error_area=0.04, max_range=10.0)


@pytest.fixture
def grid(geometry, sensor):
    return LambdaGrid(geometry, sensor)


@pytest.fixture
def observed_free_grid(geometry, sensor):
    """Field where every cell has been seen free many times."""
    g = LambdaGrid(geometry, sensor)
    g.misses[:] = 100
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
