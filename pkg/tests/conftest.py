import pytest

import noetherlab
from noetherlab import catalog


@pytest.fixture(autouse=True)
def _clear_caches():
    catalog.builtin.cache_clear()
    yield
    catalog.builtin.cache_clear()


@pytest.fixture()
def kepler():
    return noetherlab.builtin('kepler').spec


@pytest.fixture()
def harmonic():
    return noetherlab.builtin('harmonic').spec


@pytest.fixture()
def free1d():
    return noetherlab.builtin('free1d').spec


@pytest.fixture()
def free2d():
    return noetherlab.builtin('free2d').spec


@pytest.fixture()
def x_star():
    return noetherlab.PhasePoint(t=0, q=(1, 0), p=(0, 1))
