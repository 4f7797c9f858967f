import os

import pytest
from hypothesis import HealthCheck, settings

from causalaba import kernels
from causalaba.graph import Dag

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# variable indices of the four-variable example network
R, WP, WR, WS = 0, 1, 2, 3


@pytest.fixture
def example_truth():
    """Ground truth r -> wr, wp -> wr, wr -> ws, r -> ws."""
    return Dag(4, frozenset({(R, WR), (WP, WR), (WR, WS), (R, WS)}))


@pytest.fixture
def example4_graph():
    """y -> x, y -> z, x -> z, z -> u, u -> v with x=0, y=1, z=2, u=3, v=4."""
    return Dag(5, frozenset({(1, 0), (1, 2), (0, 2), (2, 3), (3, 4)}))


def available_backends():
    names = ["numpy"]
    try:
        kernels.get_backend("numba")
        names.append("numba")
    except RuntimeError:
        pass
    return names


@pytest.fixture(params=available_backends())
def backend(request):
    return request.param
