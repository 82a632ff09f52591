import pytest

from ofdm_dcsk.model import SystemParams


@pytest.fixture
def fig4_params():
    return SystemParams.from_ebn0_db(64, 128, 1, 10.0)


@pytest.fixture
def small_params():
    return SystemParams.from_ebn0_db(16, 32, 2, 10.0)
