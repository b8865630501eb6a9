import numpy as np
import pytest

from lyapmin.circle_map import BumpLayer, doubling_map, trig_map
from lyapmin.perturbation import assemble_plan


@pytest.fixture(scope="session")
def doubling():
    return doubling_map()


@pytest.fixture(scope="session")
def sin_map():
    """T(x) = 2x + 0.1 sin(2πx)."""
    return trig_map(2, [0.1])


@pytest.fixture(scope="session")
def cubic_map():
    """A degree-3 map with several harmonics and a shift."""
    return trig_map(3, [0.05, 0.02], [0.03], 0.1)


@pytest.fixture(scope="session")
def bumped_map():
    """A sine map carrying a visible (large) bump layer, for derivative checks."""
    layer = BumpLayer(centers=(0.2, 0.7), half_width=0.05, gammas=(0.8, 0.5),
                      amplitude_scale=1.0)
    return trig_map(2, [0.05]).with_layer(layer)


@pytest.fixture(scope="session")
def doubling_plan(doubling):
    return assemble_plan(doubling, 0.1, mollify=True)


@pytest.fixture(scope="session")
def sin_plan(sin_map):
    return assemble_plan(sin_map, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
