"""
Periodogram range/velocity estimation from the divided symbol matrix.

D_div = D_Rx / D_Tx leaves A * H_M times a delay ramp along subcarriers and
a Doppler ramp along symbols. An inverse DFT over subcarriers turns the delay
ramp into a peak at the range bin, a forward DFT over symbols turns the
Doppler ramp into a peak at the velocity bin. Columns (rows) are combined by
averaging |.|^2.
"""

import logging
from dataclasses import dataclass

import numpy as np

from app.channel.irs_channel import Scenario, add_noise, apply_echo
from app.config import DEFAULT_PADDING_FACTOR, MSE_CHUNK_TRIALS, SPEED_OF_LIGHT
from app.errors import ConfigurationError, DimensionError, ZeroSymbolError
from app.utils.helpers import child_seed, db_to_linear, map_tasks
from app.waveform.ofdm_frame import FrameConfig, ModulationWeight, SymbolMatrix, build_frame

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimationResult:
    range_estimate: float
    velocity_estimate: float
    range_bin: int
    velocity_bin: int
    peak_magnitude: float
    padding_factor: int


@dataclass(frozen=True)
class MseSweepResult:
    snr_db: np.ndarray
    mse_range: np.ndarray
    mse_velocity: np.ndarray
    trials: int
    range_floor: float
    velocity_floor: float


# ==================================================
# DIVISION
# ==================================================
def divide(d_rx: SymbolMatrix, d_tx: SymbolMatrix) -> SymbolMatrix:
    """Element-wise D_Rx / D_Tx."""
    if d_rx.shape != d_tx.shape:
        raise DimensionError(f"cannot divide {d_rx.shape} by {d_tx.shape}")

    zeros = np.argwhere(d_tx.entries == 0)
    if zeros.size:
        raise ZeroSymbolError(tuple(int(i) for i in zeros[0]))

    return SymbolMatrix(d_rx.entries / d_tx.entries)


# ==================================================
# PROFILES
# ==================================================
def _check_padding(padding_factor: int) -> int:
    if int(padding_factor) != padding_factor or padding_factor < 1:
        raise ConfigurationError(
            f"padding_factor must be an integer >= 1, got {padding_factor}",
            key="estimator.padding_factor",
        )
    return int(padding_factor)


def range_profile(d_div: SymbolMatrix, padding_factor: int = DEFAULT_PADDING_FACTOR) -> np.ndarray:
    """Zero-padded IDFT over subcarriers, |.|^2 averaged over symbols."""
    size = _check_padding(padding_factor) * d_div.n_subcarriers
    spectrum = np.fft.ifft(d_div.entries, n=size, axis=0, norm="ortho")
    return np.mean(np.abs(spectrum) ** 2, axis=1)


def velocity_profile(d_div: SymbolMatrix, padding_factor: int = DEFAULT_PADDING_FACTOR) -> np.ndarray:
    """Zero-padded DFT over symbols, |.|^2 averaged over subcarriers."""
    size = _check_padding(padding_factor) * d_div.n_symbols
    spectrum = np.fft.fft(d_div.entries, n=size, axis=1, norm="ortho")
    return np.mean(np.abs(spectrum) ** 2, axis=0)


def range_velocity_map(d_div: SymbolMatrix, padding_factor: int = DEFAULT_PADDING_FACTOR) -> np.ndarray:
    """2-D delay-Doppler map |IDFT_n DFT_mu D_div|^2, range bins along axis 0."""
    padding_factor = _check_padding(padding_factor)
    spectrum = np.fft.ifft(
        d_div.entries, n=padding_factor * d_div.n_subcarriers, axis=0, norm="ortho"
    )
    spectrum = np.fft.fft(spectrum, n=padding_factor * d_div.n_symbols, axis=1, norm="ortho")
    return np.abs(spectrum) ** 2


# ==================================================
# BIN <-> PHYSICAL UNITS
# ==================================================
def range_bin_width(config: FrameConfig, padding_factor: int) -> float:
    return SPEED_OF_LIGHT / (2.0 * config.subcarrier_spacing * padding_factor * config.n_subcarriers)


def velocity_bin_width(config: FrameConfig, padding_factor: int) -> float:
    return SPEED_OF_LIGHT / (
        2.0 * config.carrier_frequency * padding_factor * config.n_symbols * config.symbol_duration
    )


def unambiguous_range(config: FrameConfig) -> float:
    return SPEED_OF_LIGHT / (2.0 * config.subcarrier_spacing)


def unambiguous_velocity(config: FrameConfig) -> float:
    """Largest |nu| before the Doppler ramp aliases (symmetric)."""
    return SPEED_OF_LIGHT / (4.0 * config.carrier_frequency * config.symbol_duration)


def signed_bin(index: int, length: int) -> int:
    """Bins above length/2 fold to negative frequencies."""
    return index - length if index > length // 2 else index


# ==================================================
# ESTIMATE
# ==================================================
def estimate(
    d_div: SymbolMatrix,
    config: FrameConfig,
    padding_factor: int = DEFAULT_PADDING_FACTOR,
) -> EstimationResult:
    """Peak-index estimate; ties go to the lowest bin (np.argmax)."""
    d_div.require_shape(config)

    r_profile = range_profile(d_div, padding_factor)
    v_profile = velocity_profile(d_div, padding_factor)

    range_bin = int(np.argmax(r_profile))
    velocity_bin = int(np.argmax(v_profile))

    return EstimationResult(
        range_estimate=range_bin * range_bin_width(config, padding_factor),
        velocity_estimate=signed_bin(velocity_bin, v_profile.size)
        * velocity_bin_width(config, padding_factor),
        range_bin=range_bin,
        velocity_bin=velocity_bin,
        peak_magnitude=float(np.sqrt(r_profile[range_bin])),
        padding_factor=int(padding_factor),
    )


# ==================================================
# MONTE CARLO MSE
# ==================================================
@dataclass(frozen=True)
class _MseChunk:
    config: FrameConfig
    scenario: Scenario
    noise_powers: tuple
    trial_indices: tuple
    seed: int
    h: complex
    weight: ModulationWeight
    padding_factor: int


def _trial_seeds(seed: int, trial: int) -> tuple[int, int]:
    """(payload seed, noise seed) for one trial; shared by every SNR point."""
    payload_seed, noise_seed = child_seed(seed, trial).generate_state(2)
    return int(payload_seed), int(noise_seed)


def _run_mse_chunk(chunk: _MseChunk) -> np.ndarray:
    """Squared range and velocity errors, shape (trials, snr points, 2)."""
    errors = np.empty((len(chunk.trial_indices), len(chunk.noise_powers), 2))

    for row, trial in enumerate(chunk.trial_indices):
        payload_seed, noise_seed = _trial_seeds(chunk.seed, trial)
        d_tx = build_frame(chunk.config, weight=chunk.weight, seed=payload_seed)
        echo = apply_echo(d_tx, chunk.config, chunk.scenario, chunk.h)

        for col, noise_power in enumerate(chunk.noise_powers):
            d_rx = add_noise(echo, noise_power, seed=noise_seed)
            result = estimate(divide(d_rx, d_tx), chunk.config, chunk.padding_factor)
            errors[row, col, 0] = (result.range_estimate - chunk.scenario.range) ** 2
            errors[row, col, 1] = (result.velocity_estimate - chunk.scenario.velocity) ** 2

    return errors


def mse_sweep(
    config: FrameConfig,
    scenario: Scenario,
    snr_grid,
    trials: int,
    seed: int,
    h: complex = 1.0,
    weight: ModulationWeight = ModulationWeight(),
    padding_factor: int = DEFAULT_PADDING_FACTOR,
    workers: int = 1,
    chunk_trials: int | None = None,
) -> MseSweepResult:
    """
    Empirical range (and velocity) MSE over an SNR grid in dB.

    An SNR value is |A|^2 / noise_power, the per-sample SNR without IRS;
    the echo carries `h`, so the effective SNR is |h|^2 * SNR. +inf means
    noiseless. Each trial draws a fresh payload and noise realization.
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}", key="estimator.trials")
    padding_factor = _check_padding(padding_factor)
    chunk_trials = max(1, int(chunk_trials or MSE_CHUNK_TRIALS))

    snr_db = np.asarray(snr_grid, dtype=float).ravel()
    noise_powers = tuple(float(abs(weight.value) ** 2 / s) for s in db_to_linear(snr_db))

    chunks = [
        _MseChunk(
            config=config,
            scenario=scenario,
            noise_powers=noise_powers,
            trial_indices=tuple(range(start, min(start + chunk_trials, trials))),
            seed=seed,
            h=complex(h),
            weight=weight,
            padding_factor=padding_factor,
        )
        for start in range(0, trials, chunk_trials)
    ]

    logger.debug("mse sweep: %d trials x %d SNR points in %d chunks", trials, snr_db.size, len(chunks))
    errors = np.concatenate(map_tasks(_run_mse_chunk, chunks, workers, desc="MSE trials"), axis=0)
    mse = errors.mean(axis=0)

    d_tx = build_frame(config, weight=weight, seed=seed)
    noiseless = estimate(divide(apply_echo(d_tx, config, scenario, h), d_tx), config, padding_factor)

    return MseSweepResult(
        snr_db=snr_db,
        mse_range=mse[:, 0],
        mse_velocity=mse[:, 1],
        trials=trials,
        range_floor=(noiseless.range_estimate - scenario.range) ** 2,
        velocity_floor=(noiseless.velocity_estimate - scenario.velocity) ** 2,
    )
