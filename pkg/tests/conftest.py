import os

import pytest
from hypothesis import HealthCheck, settings

from rasterjoin.geom import Mbr, SimplePolygon
from rasterjoin.grid import GridConfig

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def square(x0, y0, x1, y1):
    return SimplePolygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


UNIT = square(0, 0, 1, 1)


@pytest.fixture
def unit_square():
    return UNIT


@pytest.fixture
def grid8():
    """N=3 grid whose cells are unit squares over [0,8]^2."""
    return GridConfig(3, Mbr(0, 0, 8, 8))
