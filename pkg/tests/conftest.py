#
# For licensing see accompanying LICENSE file.
#

import numpy as np
import pytest

from qme.engine import DetectorSpec, SystemSpec, measure, select_branch, thermal_state
from qme.optimizer import SearchConfig
from qme.utils.identities import random_density_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def coupled_spec():
    return SystemSpec.two_qubit((-0.05, -0.10), -0.2)


@pytest.fixture
def surface_spec():
    return SystemSpec.two_qubit((0.05, 0.10), -0.2)


@pytest.fixture
def surface_branch(surface_spec):
    detectors = [DetectorSpec(1, 0.2), DetectorSpec(2, 0.2)]
    return select_branch(measure(thermal_state(surface_spec), detectors), '++')


@pytest.fixture
def fast_search():
    return SearchConfig(grid_spacing=0.5, grid_size=121)


@pytest.fixture
def random_instance(rng):
    """ Factory of (spec, rho) pairs with random fields, all-to-all coupling and a random full-rank state """
    def make(n_sites):
        coupling = [(j, k, rng.uniform(-0.3, 0.3)) for j in range(1, n_sites + 1) for k in range(j + 1, n_sites + 1)]
        spec = SystemSpec(n_sites, tuple(rng.uniform(-0.5, 0.5, size=n_sites)), coupling, rng.uniform(0.5, 2.0))
        return spec, random_density_matrix(2 ** n_sites, rng)
    return make
