"""
OFDM transmit frame: 16QAM payload mapped onto an N_c x N_sym symbol grid.

Rows are subcarriers, columns are OFDM symbols. Power is carried by the
link budget, never by the symbols: the constellation has unit mean energy.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from app.errors import ConfigurationError, DimensionError

logger = logging.getLogger(__name__)

BITS_PER_SYMBOL = 4
QAM16_SCALE = np.sqrt(10.0)

# Gray-coded PAM-4 levels indexed by the 2-bit value (b_hi, b_lo):
# 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
_GRAY_PAM4 = np.array([-3.0, -1.0, 3.0, 1.0])


def _build_qam16_map() -> np.ndarray:
    index = np.arange(16)
    in_phase = _GRAY_PAM4[index >> 2]
    quadrature = _GRAY_PAM4[index & 0b11]
    return (in_phase + 1j * quadrature) / QAM16_SCALE


# Index = 8*b0 + 4*b1 + 2*b2 + b3; b0 b1 select I, b2 b3 select Q.
QAM16_MAP = _build_qam16_map()


# ==================================================
# DOMAIN TYPES
# ==================================================
@dataclass(frozen=True)
class FrameConfig:
    """OFDM numerology of one sensing frame."""

    n_subcarriers: int
    n_symbols: int
    subcarrier_spacing: float
    symbol_duration: float
    carrier_frequency: float

    # T * delta_f may deviate from 1 by at most this much
    ORTHOGONALITY_TOLERANCE = 0.01

    def __post_init__(self):
        if int(self.n_subcarriers) != self.n_subcarriers or self.n_subcarriers < 2:
            raise ConfigurationError(
                f"n_subcarriers must be an integer >= 2, got {self.n_subcarriers}",
                key="frame.n_subcarriers",
            )
        if int(self.n_symbols) != self.n_symbols or self.n_symbols < 1:
            raise ConfigurationError(
                f"n_symbols must be an integer >= 1, got {self.n_symbols}",
                key="frame.n_symbols",
            )
        if not self.subcarrier_spacing > 0:
            raise ConfigurationError(
                f"subcarrier_spacing must be > 0, got {self.subcarrier_spacing}",
                key="frame.subcarrier_spacing",
            )
        if not self.symbol_duration > 0:
            raise ConfigurationError(
                f"symbol_duration must be > 0, got {self.symbol_duration}",
                key="frame.symbol_duration",
            )
        if not self.carrier_frequency > 0:
            raise ConfigurationError(
                f"carrier_frequency must be > 0, got {self.carrier_frequency}",
                key="frame.carrier_frequency",
            )

        product = self.symbol_duration * self.subcarrier_spacing
        if abs(product - 1.0) > self.ORTHOGONALITY_TOLERANCE:
            raise ConfigurationError(
                "symbol_duration * subcarrier_spacing must be 1 within 1% "
                f"(T = 1/delta_f), got {product:.6g}",
                key="frame.symbol_duration",
            )

        object.__setattr__(self, "n_subcarriers", int(self.n_subcarriers))
        object.__setattr__(self, "n_symbols", int(self.n_symbols))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_subcarriers, self.n_symbols)

    @property
    def n_bits(self) -> int:
        """Payload bits carried by one full frame."""
        return BITS_PER_SYMBOL * self.n_subcarriers * self.n_symbols


@dataclass(frozen=True)
class SymbolMatrix:
    """
    Complex symbol grid, shape (n_subcarriers, n_symbols).
    Holds D_Tx, D_Rx or D_div. The array is stored read-only.
    """

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex, copy=True)
        if entries.ndim != 2:
            raise DimensionError(f"symbol matrix must be 2-D, got shape {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def n_subcarriers(self) -> int:
        return self.entries.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.entries.shape[1]

    def require_shape(self, config: FrameConfig) -> None:
        if self.shape != config.shape:
            raise DimensionError(
                f"symbol matrix shape {self.shape} does not match frame {config.shape}"
            )


@dataclass(frozen=True)
class ModulationWeight:
    """Complex modulation weight A, one scalar per frame."""

    value: complex = 1.0 + 0.0j

    def __post_init__(self):
        value = complex(self.value)
        if not abs(value) > 0:
            raise ConfigurationError("modulation weight magnitude must be > 0", key="frame.modulation_weight")
        object.__setattr__(self, "value", value)


@dataclass(frozen=True)
class QamModulation:
    symbols: np.ndarray
    pad_bits: int = 0
    bit_count: int = field(default=0)


# ==================================================
# 16QAM MAPPING
# ==================================================
def modulate_qam16(bit_stream) -> QamModulation:
    """
    Maps bits onto Gray-coded 16QAM with unit mean energy.

    A ragged tail is padded with zero bits; the pad count is
    returned in the result.
    """
    bits = np.asarray(bit_stream, dtype=np.int64).ravel()
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bit stream may contain only 0 and 1")

    pad_bits = (-bits.size) % BITS_PER_SYMBOL
    if pad_bits:
        bits = np.concatenate([bits, np.zeros(pad_bits, dtype=np.int64)])

    groups = bits.reshape(-1, BITS_PER_SYMBOL)
    index = groups @ np.array([8, 4, 2, 1])
    return QamModulation(
        symbols=QAM16_MAP[index],
        pad_bits=pad_bits,
        bit_count=bits.size - pad_bits,
    )


# ==================================================
# FRAME ASSEMBLY
# ==================================================
def build_frame(
    config: FrameConfig,
    payload=(),
    weight: ModulationWeight = ModulationWeight(),
    seed: int = 0,
) -> SymbolMatrix:
    """
    D_Tx with entry (n, mu) = A * d_Tx(mu, n).

    Payload bits fill the grid symbol by symbol (all subcarriers of
    symbol 0 first). Missing bits are drawn from a generator seeded with
    `seed`; surplus bits are dropped.
    """
    payload = np.asarray(payload, dtype=np.int64).ravel()
    needed = config.n_bits

    if payload.size > needed:
        logger.warning(
            "payload has %d bits, frame holds %d; extra bits dropped", payload.size, needed
        )
        payload = payload[:needed]
    elif payload.size < needed:
        rng = np.random.default_rng(seed)
        fill = rng.integers(0, 2, size=needed - payload.size)
        payload = np.concatenate([payload, fill])

    symbols = modulate_qam16(payload).symbols
    grid = symbols.reshape(config.n_symbols, config.n_subcarriers).T
    return SymbolMatrix(weight.value * grid)
