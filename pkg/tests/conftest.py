import numpy as np
import pytest

from starcalc.fields import const_field
from starcalc.model import GroundConfiguration, PhaseSpace
from starcalc.rng import philox_stream


@pytest.fixture(scope="session", autouse=True)
def _warm_jit():
    # first njit call pays compilation; keep it out of individual tests
    from starcalc.transforms import conv_fast_values, conv_naive_values, cover_naive_values
    a = np.ones(4)
    conv_naive_values(a, a, 2)
    cover_naive_values(a, a, 2)
    conv_fast_values(a, a, 2, cutoff=0)


@pytest.fixture
def rng():
    return philox_stream(2024)


@pytest.fixture
def ground3():
    return GroundConfiguration([[0.1], [0.5], [0.9]])


@pytest.fixture
def space():
    return PhaseSpace(1, [[0.0, 1.0]], z=1.5, density=const_field(1.0))
