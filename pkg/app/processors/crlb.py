"""
Fisher information and Cramer-Rao bounds for OFDM radar ranging.

Single-symbol model over N_c subcarriers:

    s_n = A |H_M| exp(j(2 pi f n + psi)),   n = 0 .. N_c - 1

with unknowns (|H_M|, f, psi) and A known. Re(J^H J) of this model is

    [[A^2 N_c,  0,                    0                ],
     [0,        (2 pi |H_M| A)^2 G,   pi (|H_M| A)^2 U ],
     [0,        pi (|H_M| A)^2 U,     (|H_M| A)^2 N_c  ]]

U = N_c (N_c - 1), G = U (2 N_c - 1) / 6. That matrix is the information at
complex noise variance 2; the bounds below are for unit complex noise
variance (twice the information), so (|H_M| A)^2 is the per-sample SNR.
"""

from dataclasses import dataclass

import numpy as np

from app.config import SPEED_OF_LIGHT
from app.errors import ConfigurationError
from app.waveform.ofdm_frame import FrameConfig

# Complex noise variance at which fisher_matrix is the exact information.
FISHER_NOISE_VARIANCE = 2.0

_C0_SQUARED = SPEED_OF_LIGHT**2


@dataclass(frozen=True)
class FisherMatrix:
    entries: np.ndarray
    upsilon: float
    gamma: float


@dataclass(frozen=True)
class CrlbReport:
    crlb_frequency: float
    crlb_range: float
    crlb_velocity: float
    n_subcarriers: int
    n_symbols: int
    subcarrier_spacing: float
    symbol_duration: float
    carrier_frequency: float
    h_mag: float
    amplitude: float


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigurationError(message)


# ==================================================
# FISHER MATRIX
# ==================================================
def fisher_matrix(a: float, h_mag: float, n_c: int) -> FisherMatrix:
    _require(n_c >= 2, f"n_c must be >= 2, got {n_c}")
    _require(a > 0, f"amplitude must be > 0, got {a}")

    upsilon = n_c * (n_c - 1.0)
    gamma = upsilon * (2.0 * n_c - 1.0) / 6.0
    signal = (h_mag * a) ** 2

    entries = np.array(
        [
            [a**2 * n_c, 0.0, 0.0],
            [0.0, (2.0 * np.pi) ** 2 * signal * gamma, np.pi * signal * upsilon],
            [0.0, np.pi * signal * upsilon, signal * n_c],
        ]
    )
    return FisherMatrix(entries=entries, upsilon=upsilon, gamma=gamma)


def fisher_numeric_oracle(
    a: float,
    h_mag: float,
    n_c: int,
    noise_var: float = FISHER_NOISE_VARIANCE,
    step: float = 1e-5,
    frequency: float = 0.05,
    phase: float = 0.3,
) -> np.ndarray:
    """
    Expected negative Hessian of the log-likelihood, by central differences.

    Under CN(0, noise_var) noise the expected negative log-likelihood at
    trial parameters p is D(p) = sum |s(p0) - s(p)|^2 / noise_var + const,
    so the Fisher matrix (2 / noise_var) Re(J^H J) is the Hessian of D at p0.
    At the default noise_var it reproduces fisher_matrix.
    """
    _require(2 <= n_c <= 16, f"numeric oracle supports 2 <= n_c <= 16, got {n_c}")
    n = np.arange(n_c)
    p0 = np.array([h_mag, frequency, phase], dtype=float)

    def model(p):
        return a * p[0] * np.exp(1j * (2.0 * np.pi * p[1] * n + p[2]))

    reference = model(p0)

    def divergence(p):
        return float(np.sum(np.abs(reference - model(p)) ** 2)) / noise_var

    eye = np.eye(3) * step
    hessian = np.empty((3, 3))
    for i in range(3):
        hessian[i, i] = (divergence(p0 + eye[i]) - 2.0 * divergence(p0) + divergence(p0 - eye[i])) / step**2
        for j in range(i + 1, 3):
            value = (
                divergence(p0 + eye[i] + eye[j])
                - divergence(p0 + eye[i] - eye[j])
                - divergence(p0 - eye[i] + eye[j])
                + divergence(p0 - eye[i] - eye[j])
            ) / (4.0 * step**2)
            hessian[i, j] = hessian[j, i] = value

    return hessian


# ==================================================
# BOUNDS
# ==================================================
def crlb_frequency(a: float, h_mag: float, n_c: int) -> float:
    """Normalized-frequency bound on the Doppler phase step."""
    _require(n_c >= 2, f"n_c must be >= 2, got {n_c}")
    return 6.0 / ((2.0 * np.pi * h_mag * a) ** 2 * n_c * (n_c**2 - 1.0))


def crlb_range(a: float, h_mag: float, n_c: int, n_sym: int, delta_f: float) -> float:
    """Range bound in m^2, averaged over N_sym symbols."""
    _require(n_c >= 2, f"n_c must be >= 2, got {n_c}")
    _require(n_sym >= 1, f"n_sym must be >= 1, got {n_sym}")
    return (
        6.0
        * _C0_SQUARED
        / ((4.0 * np.pi * delta_f) ** 2 * h_mag**2 * a**2 * n_sym * n_c * (n_c**2 - 1.0))
    )


def crlb_range_single(a: float, h_mag: float, n_c: int, delta_f: float) -> float:
    """Range bound from one OFDM symbol."""
    return crlb_range(a, h_mag, n_c, 1, delta_f)


def crlb_velocity(a: float, h_mag: float, n_c: int, n_sym: int, t: float, f_c: float) -> float:
    """Velocity bound in (m/s)^2, averaged over N_c subcarriers."""
    _require(n_sym >= 2, f"n_sym must be >= 2 for a velocity bound, got {n_sym}")
    _require(n_c >= 1, f"n_c must be >= 1, got {n_c}")
    return (
        6.0
        * _C0_SQUARED
        / ((4.0 * np.pi * t * f_c) ** 2 * h_mag**2 * a**2 * n_sym * n_c * (n_sym**2 - 1.0))
    )


def crlb_report(config: FrameConfig, a: float, h_mag: float) -> CrlbReport:
    return CrlbReport(
        crlb_frequency=crlb_frequency(a, h_mag, config.n_subcarriers),
        crlb_range=crlb_range(
            a, h_mag, config.n_subcarriers, config.n_symbols, config.subcarrier_spacing
        ),
        crlb_velocity=crlb_velocity(
            a,
            h_mag,
            config.n_subcarriers,
            config.n_symbols,
            config.symbol_duration,
            config.carrier_frequency,
        ),
        n_subcarriers=config.n_subcarriers,
        n_symbols=config.n_symbols,
        subcarrier_spacing=config.subcarrier_spacing,
        symbol_duration=config.symbol_duration,
        carrier_frequency=config.carrier_frequency,
        h_mag=h_mag,
        amplitude=a,
    )
