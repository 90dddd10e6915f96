"""
CA-CFAR detection statistics behind a square-law detector.

Threshold T = (alpha / N) * sum of N reference cells. With exponential
noise cells and a Rayleigh-fluctuating target of mean SNR gamma:

    P_fa = (1 + alpha/N)^(-N)
    P_d  = (1 + alpha/(N (1 + gamma)))^(-N)  ->  P_fa^(1/(1+gamma))  as N -> inf
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from app.channel.irs_channel import Scenario, complex_gaussian, unit_profile
from app.config import CHUNK_TRIALS
from app.errors import ConfigurationError
from app.processors.link_budget import receiver_snr
from app.utils.helpers import child_rng, child_seed, linear_to_db, map_tasks, split_trials

logger = logging.getLogger(__name__)

MIN_MONTE_CARLO_TRIALS = 1000


class CurveSource(str, Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class DetectionCurve:
    pfa_target: float
    grid: np.ndarray
    pd_values: np.ndarray
    source: CurveSource
    baseline_pd: float | None = None
    snr_linear: np.ndarray | None = None

    @property
    def snr_db(self) -> np.ndarray | None:
        return None if self.snr_linear is None else linear_to_db(self.snr_linear)


def _check_pfa(pfa_target: float) -> None:
    if not 0.0 < pfa_target < 1.0:
        raise ConfigurationError(
            f"pfa_target must lie in (0, 1), got {pfa_target}", key="detection.pfa_list"
        )


def _check_n_ref(n_ref: int) -> None:
    if int(n_ref) != n_ref or n_ref < 1:
        raise ConfigurationError(f"n_ref must be an integer >= 1, got {n_ref}", key="detection.n_ref")


def _check_trials(trials: int) -> None:
    if trials < MIN_MONTE_CARLO_TRIALS:
        raise ConfigurationError(
            f"trials must be >= {MIN_MONTE_CARLO_TRIALS}, got {trials}", key="detection.trials"
        )


# ==================================================
# ANALYTIC
# ==================================================
def pfa_cfar(scale_alpha: float, n_ref: int) -> float:
    if scale_alpha < 0:
        raise ConfigurationError(f"scale_alpha must be >= 0, got {scale_alpha}")
    _check_n_ref(n_ref)
    # exp/log1p keeps large-N evaluations accurate
    return float(np.exp(-n_ref * np.log1p(scale_alpha / n_ref)))


def scale_for_pfa(pfa_target: float, n_ref: int) -> float:
    """Inverse of pfa_cfar: N (P_fa^(-1/N) - 1)."""
    _check_pfa(pfa_target)
    _check_n_ref(n_ref)
    return float(n_ref * np.expm1(-np.log(pfa_target) / n_ref))


def pd_cfar(scale_alpha: float, n_ref: int, snr_linear: float) -> float:
    if snr_linear < 0:
        raise ConfigurationError(f"snr_linear must be >= 0, got {snr_linear}")
    if np.isinf(snr_linear):
        return 1.0
    return pfa_cfar(scale_alpha / (1.0 + snr_linear), n_ref)


def pd_limit(pfa_target: float, snr_linear):
    """Large-N limit P_fa^(1/(1+gamma)); vectorized over snr_linear."""
    _check_pfa(pfa_target)
    snr = np.asarray(snr_linear, dtype=float)
    if np.any(snr < 0):
        raise ConfigurationError("snr_linear must be >= 0")
    pd = np.exp(np.log(pfa_target) / (1.0 + snr))
    return float(pd) if pd.ndim == 0 else pd


# ==================================================
# MONTE CARLO (SQUARE-LAW + CA-CFAR)
# ==================================================
@dataclass(frozen=True)
class _DetectionChunk:
    threshold_factor: float
    n_ref: int
    snr_linear: float
    trials: int
    seed: int
    index: int


def _count_detections(chunk: _DetectionChunk) -> int:
    rng = child_rng(chunk.seed, chunk.index)

    target = complex_gaussian(rng, chunk.trials, chunk.snr_linear)
    cut = np.abs(target + complex_gaussian(rng, chunk.trials)) ** 2
    reference = np.abs(complex_gaussian(rng, (chunk.trials, chunk.n_ref))) ** 2

    threshold = chunk.threshold_factor * reference.sum(axis=1)
    return int(np.count_nonzero(cut > threshold))


def pd_monte_carlo(
    pfa_target: float,
    n_ref: int,
    snr_linear: float,
    trials: int,
    seed: int,
    workers: int = 1,
    chunk_trials: int = CHUNK_TRIALS,
) -> float:
    """
    Detection fraction of a simulated CA-CFAR.

    Cell under test: |s + w|^2, s ~ CN(0, gamma), w ~ CN(0, 1).
    Reference cells: |w_i|^2, noise only.
    """
    _check_pfa(pfa_target)
    _check_n_ref(n_ref)
    _check_trials(trials)

    factor = scale_for_pfa(pfa_target, n_ref) / n_ref
    chunks = [
        _DetectionChunk(factor, int(n_ref), float(snr_linear), size, seed, index)
        for index, size in enumerate(split_trials(trials, chunk_trials))
    ]

    detections = sum(map_tasks(_count_detections, chunks, workers, desc="CFAR trials"))
    logger.debug(
        "pd_monte_carlo pfa=%g N=%d snr=%g: %d/%d", pfa_target, n_ref, snr_linear, detections, trials
    )
    return detections / trials


def binomial_sigma(p: float, trials: int) -> float:
    """Standard deviation of a detection-rate estimate over `trials` draws."""
    return float(stats.binom.std(trials, p)) / trials


# ==================================================
# Pd VERSUS NUMBER OF SUB-SURFACES
# ==================================================
def pd_vs_m_curve(
    scenario: Scenario,
    m_grid,
    pfa_target: float,
    processing_gain: float = 1.0,
) -> DetectionCurve:
    """
    Aligned unit IRS with M sub-surfaces, gamma from the link budget,
    P_d from the large-N limit. The no-IRS baseline is the M = 1 channel.
    """
    m_grid = np.asarray(m_grid, dtype=int).ravel()
    if m_grid.size == 0:
        raise ConfigurationError("m_grid must not be empty", key="irs.m_grid")
    if np.any(m_grid < 1):
        raise ConfigurationError("m_grid entries must be >= 1", key="irs.m_grid")

    snr = np.array([receiver_snr(scenario, unit_profile(int(m)), processing_gain) for m in m_grid])
    baseline = receiver_snr(scenario, unit_profile(1), processing_gain)

    return DetectionCurve(
        pfa_target=pfa_target,
        grid=m_grid,
        pd_values=np.atleast_1d(pd_limit(pfa_target, snr)),
        source=CurveSource.ANALYTIC,
        baseline_pd=pd_limit(pfa_target, baseline),
        snr_linear=snr,
    )


def pd_vs_m_monte_carlo(
    scenario: Scenario,
    m_grid,
    pfa_target: float,
    n_ref: int,
    trials: int,
    seed: int,
    processing_gain: float = 1.0,
    workers: int = 1,
    chunk_trials: int = CHUNK_TRIALS,
) -> DetectionCurve:
    """
    Simulated CA-CFAR with n_ref reference cells along the same M grid
    as pd_vs_m_curve. Grid point k draws from child seed (seed, k).
    """
    _check_pfa(pfa_target)
    _check_n_ref(n_ref)
    _check_trials(trials)
    analytic = pd_vs_m_curve(scenario, m_grid, pfa_target, processing_gain)

    factor = scale_for_pfa(pfa_target, n_ref) / n_ref
    sizes = split_trials(trials, chunk_trials)
    chunks = [
        _DetectionChunk(factor, int(n_ref), float(snr), size, int(child_seed(seed, point).generate_state(1)[0]), index)
        for point, snr in enumerate(analytic.snr_linear)
        for index, size in enumerate(sizes)
    ]

    counts = np.array(map_tasks(_count_detections, chunks, workers, desc="CFAR trials"))
    detections = counts.reshape(analytic.grid.size, len(sizes)).sum(axis=1)

    return DetectionCurve(
        pfa_target=pfa_target,
        grid=analytic.grid,
        pd_values=detections / trials,
        source=CurveSource.MONTE_CARLO,
        snr_linear=analytic.snr_linear,
    )
