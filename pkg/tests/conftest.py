import numpy as np
import pytest

from onebitnet import (ExponentialModel, GaussianModel, build_uniform_matrix,
                       reference_topology)


@pytest.fixture(scope="session")
def gauss1():
    return GaussianModel(1.0)


@pytest.fixture(scope="session")
def expo5():
    return ExponentialModel(5.0)


@pytest.fixture(scope="session")
def topology():
    return reference_topology()


def make_network(a):
    return build_uniform_matrix(reference_topology(), a)


@pytest.fixture(scope="session")
def net_a25():
    return make_network(0.25)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(202408)
