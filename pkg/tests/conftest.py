import numpy as np
import pytest

from kron_trace.generators import gen_half_strip, gen_sg_slit
from kron_trace.trace import schur_trace


@pytest.fixture(scope="session")
def sg():
    """Slit gasket domains by level, built once."""
    cache = {}

    def get(level):
        if level not in cache:
            cache[level] = gen_sg_slit(level)
        return cache[level]

    return get


@pytest.fixture(scope="session")
def sg_trace(sg):
    cache = {}

    def get(level):
        if level not in cache:
            cache[level] = schur_trace(sg(level).net)
        return cache[level]

    return get


@pytest.fixture(scope="session")
def strip8():
    return gen_half_strip(8, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
