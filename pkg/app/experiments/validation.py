"""
Cross-module oracle suite behind `validate`.

Each check returns a CheckResult instead of raising, so one failing
oracle never hides the others. `quick` trims trial counts and grids for
a fast smoke run; the full suite is the release gate.
"""

import logging
import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from app.channel.irs_channel import (
    Scenario,
    apply_echo,
    random_profile,
    sensing_channel,
    unit_profile,
)
from app.config import DEFAULT_SEED, WORKERS
from app.experiments.experiment_config import ExperimentConfig
from app.experiments.experiment_runner import _SnrPoint, _snr_point_rows
from app.processors.crlb import (
    crlb_frequency,
    crlb_range,
    crlb_velocity,
    fisher_matrix,
    fisher_numeric_oracle,
)
from app.processors.detection import (
    binomial_sigma,
    pd_cfar,
    pd_monte_carlo,
    pd_vs_m_curve,
    pd_vs_m_monte_carlo,
    pfa_cfar,
    scale_for_pfa,
)
from app.processors.estimator import divide, estimate, mse_sweep, range_bin_width, velocity_bin_width
from app.processors.link_budget import link_factor, receiver_snr, snr_gain_db
from app.processors.phase_optimizer import OptimizerConfig, closed_form_optimum, optimize
from app.utils.helpers import child_rng, linear_to_db
from app.waveform.ofdm_frame import build_frame

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _relative_error(actual, expected) -> np.ndarray:
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    return np.abs(actual - expected) / np.abs(expected)


# ==================================================
# LINK BUDGET
# ==================================================
def check_snr_gain(config: ExperimentConfig, quick: bool) -> CheckResult:
    grid = (1, 2, 4, 8, 16, 32, 64)
    base = receiver_snr(config.scenario, unit_profile(1))
    gains = [float(linear_to_db(receiver_snr(config.scenario, unit_profile(m)) / base)) for m in grid]
    worst = max(abs(g - snr_gain_db(m)) for g, m in zip(gains, grid))
    return CheckResult("snr gain 20 lg M", worst <= 0.01, f"max deviation {worst:.2e} dB")


def check_snr_ordering(config: ExperimentConfig, quick: bool) -> CheckResult:
    grid = (2, 4, 8, 16, 32, 64) if quick else tuple(range(2, 65))
    table = {}
    for m in grid:
        point = _SnrPoint(
            m=m,
            modes=("optimal", "random", "none"),
            scenario=config.scenario,
            optimizer=config.optimizer,
            random_draws=1000,
            processing_gain=1.0,
            seed=config.seed,
        )
        table[m] = {row["mode"]: row["snr_db"] for row in _snr_point_rows(point)}

    ordered = all(t["optimal"] >= t["random"] >= t["none"] for t in table.values())
    at_16 = table[16]
    margin = min(at_16["optimal"] - at_16["random"], at_16["random"] - at_16["none"])
    return CheckResult(
        "snr ordering optimal >= random >= none",
        ordered and margin >= 1.0,
        f"{len(grid)} M values, smallest gap at M=16: {margin:.2f} dB",
    )


# ==================================================
# DETECTION
# ==================================================
def check_cfar_roundtrip(config: ExperimentConfig, quick: bool) -> CheckResult:
    worst = 0.0
    for p in (1e-2, 1e-4, 1e-6):
        for n in (1, 8, 16, 64):
            alpha = scale_for_pfa(p, n)
            worst = max(worst, abs(pfa_cfar(alpha, n) - p), abs(pd_cfar(alpha, n, 0.0) - p))
    return CheckResult("cfar scale/pfa round trip", worst <= 1e-12, f"max error {worst:.2e}")


def check_pd_monte_carlo(config: ExperimentConfig, quick: bool) -> CheckResult:
    trials = 20_000 if quick else 100_000
    grid = [
        (pfa, n_ref, snr)
        for pfa in (1e-2, 1e-3)
        for n_ref in (8, 16)
        for snr in (1.0, 10.0, 100.0)
    ]

    worst_z = 0.0
    for index, (pfa, n_ref, snr) in enumerate(grid):
        expected = pd_cfar(scale_for_pfa(pfa, n_ref), n_ref, snr)
        observed = pd_monte_carlo(pfa, n_ref, snr, trials, seed=config.seed + index, workers=WORKERS)
        z = abs(observed - expected) / binomial_sigma(expected, trials)
        logger.debug("pd mc pfa=%g N=%d snr=%g: %.5f vs %.5f (z=%.2f)", pfa, n_ref, snr, observed, expected, z)
        worst_z = max(worst_z, z)

    return CheckResult(
        "pd monte carlo vs analytic",
        worst_z <= 3.0,
        f"{len(grid)} points x {trials} trials, max |z| = {worst_z:.2f}",
    )


def detection_scenario(config: ExperimentConfig) -> tuple[Scenario, float]:
    """Short-range link where the M sweep spans low to high SNR."""
    scenario = replace(config.scenario, range=5.0, rcs=10.0, antenna_gain=3.0)
    return scenario, float(config.frame.n_subcarriers * config.frame.n_symbols)


def check_pd_vs_m(config: ExperimentConfig, quick: bool) -> CheckResult:
    scenario, gain = detection_scenario(config)
    m_grid = np.arange(1, 65)
    curves = [pd_vs_m_curve(scenario, m_grid, pfa, gain) for pfa in (1e-2, 1e-4, 1e-6)]

    monotone_m = all(np.all(np.diff(c.pd_values) > 0) for c in curves)
    monotone_pfa = all(np.all(hi.pd_values > lo.pd_values) for hi, lo in zip(curves, curves[1:]))
    above_baseline = all(np.all(c.pd_values[1:] > c.baseline_pd) for c in curves)
    return CheckResult(
        "pd vs M qualitative",
        monotone_m and monotone_pfa and above_baseline,
        f"monotone in M: {monotone_m}, in pfa: {monotone_pfa}, above no-IRS: {above_baseline}",
    )


def check_pd_vs_m_monte_carlo(config: ExperimentConfig, quick: bool) -> CheckResult:
    """Configured CA-CFAR (detection.n_ref, detection.trials) against pd_cfar along M."""
    scenario, gain = detection_scenario(config)
    n_ref, trials = config.detection.n_ref, config.detection.trials
    m_grid = (1, 4, 16, 64)

    worst = 0.0
    for index, pfa in enumerate(config.detection.pfa_list):
        simulated = pd_vs_m_monte_carlo(
            scenario, m_grid, pfa, n_ref, trials, config.seed + index, gain, workers=WORKERS
        )
        alpha = scale_for_pfa(pfa, n_ref)
        for observed, snr in zip(simulated.pd_values, simulated.snr_linear):
            expected = pd_cfar(alpha, n_ref, float(snr))
            # one-count allowance where the band collapses near 0 or 1
            band = 3.0 * binomial_sigma(expected, trials) + 1.0 / trials
            worst = max(worst, abs(observed - expected) / band)

    return CheckResult(
        "pd vs M monte carlo",
        worst <= 1.0,
        f"N={n_ref}, {trials} trials, {len(config.detection.pfa_list)} x {len(m_grid)} points, "
        f"worst deviation {worst:.2f} of band",
    )


# ==================================================
# FISHER / CRLB
# ==================================================
def check_fisher_oracle(config: ExperimentConfig, quick: bool) -> CheckResult:
    a, h_mag = 1.3, 0.7
    worst_entry = 0.0
    worst_bound = 0.0

    for n_c in (4, 8, 16):
        analytic = fisher_matrix(a, h_mag, n_c).entries
        numeric = fisher_numeric_oracle(a, h_mag, n_c)
        scale = np.abs(analytic).max()
        mask = analytic != 0
        worst_entry = max(
            worst_entry,
            float(_relative_error(numeric[mask], analytic[mask]).max()),
            float(np.abs(numeric[~mask]).max() / scale),
        )

        # bounds are for unit noise: information is twice fisher_matrix
        block = 2.0 * analytic[1:, 1:]
        inverse_ff = block[1, 1] / (block[0, 0] * block[1, 1] - block[0, 1] ** 2)
        worst_bound = max(worst_bound, float(_relative_error(crlb_frequency(a, h_mag, n_c), inverse_ff)))

    return CheckResult(
        "fisher oracle and inverse",
        worst_entry <= 1e-3 and worst_bound <= 1e-12,
        f"entry rel err {worst_entry:.2e}, bound rel err {worst_bound:.2e}",
    )


def check_crlb_scaling(config: ExperimentConfig, quick: bool) -> CheckResult:
    frame = config.frame
    a = 1.0
    args = (frame.n_subcarriers, frame.n_symbols)
    worst = 0.0
    for m in (2, 4, 8, 16, 32, 64):
        h = abs(sensing_channel(unit_profile(m)))
        for bound in (
            lambda hm: crlb_range(a, hm, *args, frame.subcarrier_spacing),
            lambda hm: crlb_velocity(a, hm, *args, frame.symbol_duration, frame.carrier_frequency),
        ):
            worst = max(worst, float(_relative_error(bound(h) / bound(1.0), 1.0 / m**2)))

    n_c_grid = (4, 8, 16, 64, 256, 512)
    n_sym_grid = (2, 4, 8, 12, 24)
    range_nc = [crlb_range(a, 1.0, n, frame.n_symbols, frame.subcarrier_spacing) for n in n_c_grid]
    range_ns = [crlb_range(a, 1.0, frame.n_subcarriers, n, frame.subcarrier_spacing) for n in n_sym_grid]
    vel_nc = [crlb_velocity(a, 1.0, n, frame.n_symbols, frame.symbol_duration, frame.carrier_frequency) for n in n_c_grid]
    vel_ns = [
        crlb_velocity(a, 1.0, frame.n_subcarriers, n, frame.symbol_duration, frame.carrier_frequency)
        for n in n_sym_grid
    ]
    decreasing = all(np.all(np.diff(v) < 0) for v in (range_nc, range_ns, vel_nc, vel_ns))

    return CheckResult(
        "crlb 1/M^2 scaling",
        worst <= 1e-12 and decreasing,
        f"max ratio error {worst:.2e}, strictly decreasing in N_c, N_sym: {decreasing}",
    )


# ==================================================
# ESTIMATOR
# ==================================================
def check_estimator_resolution(config: ExperimentConfig, quick: bool) -> CheckResult:
    frame = config.frame
    padding = config.estimator.padding_factor
    scenario = replace(config.scenario, range=60.0, velocity=30.0)

    d_tx = build_frame(frame, seed=config.seed)
    result = estimate(divide(apply_echo(d_tx, frame, scenario), d_tx), frame, padding)
    range_error = abs(result.range_estimate - scenario.range)
    velocity_error = abs(result.velocity_estimate - scenario.velocity)
    within = (
        range_error <= range_bin_width(frame, padding) / 2.0
        and velocity_error <= velocity_bin_width(frame, padding) / 2.0
    )

    other = build_frame(frame, seed=config.seed + 1)
    d_div_a = divide(apply_echo(d_tx, frame, scenario), d_tx).entries
    d_div_b = divide(apply_echo(other, frame, scenario), other).entries
    invariance = float(np.abs(d_div_a - d_div_b).max())

    return CheckResult(
        "estimator resolution",
        within and invariance <= 1e-12,
        f"range err {range_error:.3f} m, velocity err {velocity_error:.3f} m/s, payload diff {invariance:.1e}",
    )


def check_estimator_vs_crlb(config: ExperimentConfig, quick: bool) -> CheckResult:
    """
    Empirical range MSE against the bound. The target sits half a padded
    bin off the grid, so the quantized estimate is never exactly right.
    """
    frame = config.frame
    padding = config.estimator.padding_factor
    scenario = replace(config.scenario, range=41.5 * range_bin_width(frame, padding))
    snr_grid = np.arange(-30.0, -19.0, 2.0)
    trials = 100 if quick else 1000

    curves = {}
    for m in (1, 16):
        h = sensing_channel(unit_profile(m))
        sweep = mse_sweep(
            frame, scenario, snr_grid, trials, config.seed, h=h, padding_factor=padding, workers=WORKERS
        )
        bound = np.array([
            crlb_range(np.sqrt(10.0 ** (s / 10.0)), abs(h), frame.n_subcarriers, frame.n_symbols, frame.subcarrier_spacing)
            for s in snr_grid
        ])
        curves[m] = (sweep.mse_range, bound)

    above_bound = all(np.all(mse >= bound) for mse, bound in curves.values())
    non_increasing = all(np.all(np.diff(mse) <= 0.05 * mse[:-1]) for mse, _ in curves.values())
    irs_better = bool(np.all(curves[16][0] < curves[1][0]))

    return CheckResult(
        "estimator mse vs crlb",
        above_bound and non_increasing and irs_better,
        f"{trials} trials x {snr_grid.size} SNR points; >= CRLB: {above_bound}, "
        f"non-increasing: {non_increasing}, M=16 below M=1: {irs_better}",
    )


# ==================================================
# PHASE OPTIMIZER
# ==================================================
def check_optimizer(config: ExperimentConfig, quick: bool) -> CheckResult:
    instances = 5 if quick else 20
    opt_config = OptimizerConfig(max_iterations=2000)

    worst_gap = 0.0
    for k in range(instances):
        profile = random_profile(64, child_rng(config.seed, k))
        trace = optimize(profile, config.scenario, replace(opt_config, seed=k))
        worst_gap = max(worst_gap, trace.gap_db)

    # M = 3 on a 64-point phase grid per sub-surface
    profile = random_profile(3, child_rng(config.seed, instances))
    levels = 2.0 * np.pi * np.arange(64) / 64.0
    grid = np.stack(np.meshgrid(levels, levels, levels, indexing="ij"), axis=-1).reshape(-1, 3)
    channel = (profile.weights * np.exp(1j * (grid - profile.phi))).sum(axis=1)
    _, optimum = closed_form_optimum(profile, config.scenario)
    brute = link_factor(config.scenario) / config.scenario.noise_power * float(np.max(np.abs(channel) ** 2))
    never_exceeds = brute <= optimum * (1.0 + 1e-12)

    return CheckResult(
        "phase optimizer",
        worst_gap <= 0.1 and never_exceeds,
        f"{instances} instances at M=64, worst gap {worst_gap:.3f} dB; 64^3 grid max "
        f"{float(linear_to_db(brute / optimum)):.3f} dB vs closed form",
    )


# ==================================================
# SUITE
# ==================================================
CHECKS: list[tuple[str, Callable[[ExperimentConfig, bool], CheckResult]]] = [
    ("snr_gain", check_snr_gain),
    ("snr_ordering", check_snr_ordering),
    ("cfar_roundtrip", check_cfar_roundtrip),
    ("pd_monte_carlo", check_pd_monte_carlo),
    ("pd_vs_m", check_pd_vs_m),
    ("pd_vs_m_monte_carlo", check_pd_vs_m_monte_carlo),
    ("fisher_oracle", check_fisher_oracle),
    ("crlb_scaling", check_crlb_scaling),
    ("estimator_resolution", check_estimator_resolution),
    ("estimator_vs_crlb", check_estimator_vs_crlb),
    ("optimizer", check_optimizer),
]


def run_validation(
    quick: bool = False,
    config: ExperimentConfig | None = None,
    only: tuple[str, ...] | None = None,
) -> list[CheckResult]:
    config = config or ExperimentConfig(seed=DEFAULT_SEED)
    results = []

    for name, check in CHECKS:
        if only is not None and name not in only:
            continue
        started = time.perf_counter()
        try:
            result = check(config, quick)
        except Exception as exc:  # a crashing oracle is a failed check
            logger.exception("check %s raised", name)
            result = CheckResult(name, False, f"raised {type(exc).__name__}: {exc}")
        results.append(replace(result, seconds=time.perf_counter() - started))

    return results
