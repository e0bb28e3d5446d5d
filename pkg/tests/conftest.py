import math

import numpy as np
import pytest

from rydcnot.noise import NoiseConfig
from rydcnot.sequence import PhysicalParams
from rydcnot.thermal import TrapConfig, calibrate_blockade

BLOCKADE_TARGET = 2 * math.pi * 5.3e6


@pytest.fixture(scope="session")
def params():
    return PhysicalParams()


@pytest.fixture(scope="session")
def trap():
    return TrapConfig()


@pytest.fixture(scope="session")
def model(trap, params):
    rng = np.random.default_rng(np.random.SeedSequence([0, 0xB10C]))
    return calibrate_blockade(trap, params, BLOCKADE_TARGET, 50_000, rng)


@pytest.fixture()
def noiseless():
    return NoiseConfig.noiseless()
