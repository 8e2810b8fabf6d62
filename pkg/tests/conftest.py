import numpy as np
import pytest

from robinhole import HoleSpec, OuterDomain, make_punctured, triangulate, triangulate_domain
from robinhole.closeness import ClosenessLab
from robinhole.mesh import matched_mesh_pair


@pytest.fixture(scope="session")
def unit_square():
    return OuterDomain.unit_square()


@pytest.fixture(scope="session")
def punctured_01(unit_square):
    return make_punctured(unit_square, HoleSpec.disk((0.5, 0.5), 0.1))


@pytest.fixture(scope="session")
def mesh_01(punctured_01):
    return triangulate(punctured_01, 0.03)


@pytest.fixture(scope="session")
def square_mesh(unit_square):
    return triangulate_domain(unit_square, 0.05)


@pytest.fixture(scope="session")
def disk_mesh():
    return triangulate_domain(OuterDomain.disk((0.0, 0.0), 1.0), 0.05)


@pytest.fixture(scope="session")
def pair_01(punctured_01):
    return matched_mesh_pair(punctured_01, 0.025)


@pytest.fixture(scope="session")
def lab_01(pair_01, punctured_01):
    return ClosenessLab(pair_01, punctured_01, gamma=1.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
