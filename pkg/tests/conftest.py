import numpy as np
import pytest

from copula_gof.transform import GridSpec
from copula_gof.wiener import build_reference

TABLE_SEED = 20240601


@pytest.fixture(scope="session")
def grid100():
    return GridSpec.midpoints(100, 100)


@pytest.fixture(scope="session")
def table10k(grid100):
    return build_reference(grid100, 10000, TABLE_SEED)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def central_diff(f, x, h=1e-5):
    """Central differences of a scalar- or array-valued ``f`` along each coordinate of ``x``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.stack(cols, axis=-1)
