import os
from dotenv import load_dotenv
from scipy.constants import c as _SPEED_OF_LIGHT

# --------------------------------------------------
# Load environment variables
# --------------------------------------------------
load_dotenv()


# --------------------------------------------------
# Helper functions
# --------------------------------------------------
def _optional_env(key: str) -> str | None:
    """
    Fetches an optional environment variable.
    Returns None if missing or blank.
    """
    value = os.getenv(key)
    if value is None or not value.strip():
        return None
    return value.strip()


def _get_int_env(key: str, default: int) -> int:
    """
    Safely parses an integer environment variable.
    Falls back to default if invalid.
    """
    try:
        return int(os.getenv(key, default))
    except (TypeError, ValueError):
        return default


# --------------------------------------------------
# Physical constants
# --------------------------------------------------
SPEED_OF_LIGHT = float(_SPEED_OF_LIGHT)  # c_0, m/s


# --------------------------------------------------
# Runtime controls
# --------------------------------------------------
# Output directory override, used when --output-dir is not given
OUTPUT_DIR_OVERRIDE = _optional_env("IRS_ISAC_OUTPUT_DIR")

# Worker pool size for Monte Carlo fan-out (1 = in-process)
WORKERS = max(1, _get_int_env("IRS_ISAC_WORKERS", default=1))

# CA-CFAR Monte Carlo trials per task. The seed tree is keyed on chunks,
# so results do not depend on WORKERS.
CHUNK_TRIALS = max(1, _get_int_env("IRS_ISAC_CHUNK_TRIALS", default=10_000))

# Estimator trials per MSE task (one full frame estimate per trial)
MSE_CHUNK_TRIALS = max(1, _get_int_env("IRS_ISAC_MSE_CHUNK_TRIALS", default=100))

LOG_LEVEL = (_optional_env("IRS_ISAC_LOG_LEVEL") or "INFO").upper()


# --------------------------------------------------
# Default numerology and link
# --------------------------------------------------
DEFAULT_N_SUBCARRIERS = 512
DEFAULT_N_SYMBOLS = 12
DEFAULT_SUBCARRIER_SPACING = 30e3  # Hz
DEFAULT_SYMBOL_DURATION = 33.3e-6  # s
DEFAULT_CARRIER_FREQUENCY = 5.9e9  # Hz, vehicular band

DEFAULT_TRANSMIT_POWER = 20.0  # W
DEFAULT_NOISE_POWER = 0.8  # W
DEFAULT_ANTENNA_GAIN = 1.0
DEFAULT_RCS = 1.0  # m^2
DEFAULT_RANGE = 50.0  # m
DEFAULT_VELOCITY = 20.0  # m/s
DEFAULT_PATH_LOSS = 1.0

DEFAULT_TRIALS = 1000
DEFAULT_PADDING_FACTOR = 8
DEFAULT_SEED = 2023
