import numpy as np
import pytest

from spinflash.device import DeviceConfig


@pytest.fixture
def dev():
    return DeviceConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
