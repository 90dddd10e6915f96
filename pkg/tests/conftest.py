import sys
from pathlib import Path

import pytest

ROOT_DIR = Path(__file__).resolve().parent.parent
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from app.channel.irs_channel import Scenario  # noqa: E402
from app.waveform.ofdm_frame import FrameConfig  # noqa: E402


@pytest.fixture
def default_frame() -> FrameConfig:
    """N_c=512, N_sym=12, 30 kHz, 33.3 us, 5.9 GHz."""
    return FrameConfig(
        n_subcarriers=512,
        n_symbols=12,
        subcarrier_spacing=30e3,
        symbol_duration=33.3e-6,
        carrier_frequency=5.9e9,
    )


@pytest.fixture
def small_frame() -> FrameConfig:
    return FrameConfig(
        n_subcarriers=64,
        n_symbols=8,
        subcarrier_spacing=30e3,
        symbol_duration=33.3e-6,
        carrier_frequency=5.9e9,
    )


@pytest.fixture
def scenario() -> Scenario:
    return Scenario()
