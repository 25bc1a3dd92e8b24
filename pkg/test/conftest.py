import numpy as np
import pytest

from fiohardy.field import GridSpec, SampledField
from fiohardy.metric import SigmaGrid, SphereGrid, generator
from fiohardy.tent import PhaseSpaceField
from fiohardy.transform import TransformPlan

# resolved band 8, within the Nyquist frequency of both test grids
SIGMA_MIN = 1.0 / 16.0
DESK_SIGMA_MIN = 2.0**-7


@pytest.fixture(scope='session')
def grid():
    return GridSpec(2, 32, 2.0 * np.pi)


@pytest.fixture(scope='session')
def plan(grid):
    return TransformPlan.build(grid, 'standard', angles=64, sigma_levels=16, sigma_min=SIGMA_MIN)


@pytest.fixture(scope='session')
def other_plan(grid):
    return TransformPlan.build(grid, 'skewed', angles=64, sigma_levels=16, sigma_min=SIGMA_MIN)


@pytest.fixture(scope='session')
def tiny_grid():
    return GridSpec(2, 16, 2.0 * np.pi)


@pytest.fixture(scope='session')
def tiny_plan(tiny_grid):
    return TransformPlan.build(tiny_grid, 'standard', angles=48, sigma_levels=8, sigma_min=SIGMA_MIN)


@pytest.fixture(scope='session')
def desk_plan():
    # the desk configuration; packet symbols are recomputed per level to keep memory down
    return TransformPlan.build(GridSpec(2, 128, 2.0 * np.pi), 'standard', angles=128, sigma_levels=48,
                               sigma_min=DESK_SIGMA_MIN, cache_limit=0)


def _random_field(grid, seed=0):
    rng = generator(seed)
    return SampledField(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


def _random_phase_field(grid, angles=16, levels=6, seed=0):
    rng = generator(seed)
    sphere = SphereGrid.uniform(grid.dim, angles)
    sigmas = SigmaGrid.geometric(SIGMA_MIN, levels)
    shape = (sphere.size, sigmas.size) + grid.shape
    return PhaseSpaceField(grid, sphere, sigmas, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@pytest.fixture
def random_field():
    return _random_field


@pytest.fixture
def random_phase_field():
    return _random_phase_field
