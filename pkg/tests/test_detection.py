import numpy as np
import pytest

from app.channel.irs_channel import Scenario
from app.errors import ConfigurationError
from app.processors.detection import (
    CurveSource,
    binomial_sigma,
    pd_cfar,
    pd_limit,
    pd_monte_carlo,
    pd_vs_m_curve,
    pd_vs_m_monte_carlo,
    pfa_cfar,
    scale_for_pfa,
)


# ==================================================
# ANALYTIC
# ==================================================
def test_zero_scale_always_fires():
    assert pfa_cfar(0.0, 16) == 1.0


def test_single_reference_cell():
    assert pfa_cfar(1.0, 1) == pytest.approx(0.5)
    assert scale_for_pfa(0.5, 1) == pytest.approx(1.0)


def test_large_n_approaches_exponential():
    # (1 + a/N)^-N = exp(-a + a^2/(2N) - ...), 4.2e-5 relative above exp(-a) at N = 1e6
    a, n = 9.2103, 10**6
    assert pfa_cfar(a, n) == pytest.approx(np.exp(-a), rel=5e-5)
    assert pfa_cfar(a, n) == pytest.approx(np.exp(-a + a**2 / (2 * n)), rel=1e-9)


def test_scale_tends_to_zero_near_unit_pfa():
    assert scale_for_pfa(1.0 - 1e-12, 16) < 1e-10


@pytest.mark.parametrize("pfa", [1e-2, 1e-4, 1e-6])
@pytest.mark.parametrize("n_ref", [1, 8, 16, 64, 128])
def test_round_trip(pfa, n_ref):
    alpha = scale_for_pfa(pfa, n_ref)
    assert pfa_cfar(alpha, n_ref) == pytest.approx(pfa, abs=1e-12)
    assert pd_cfar(alpha, n_ref, 0.0) == pytest.approx(pfa, abs=1e-12)


def test_infinite_snr_detects():
    assert pd_cfar(scale_for_pfa(1e-4, 16), 16, np.inf) == 1.0


def test_pd_limit_reference_value():
    assert pd_limit(1e-4, 100.0) == pytest.approx(0.91284, rel=1e-4)
    assert pd_limit(1e-4, 0.0) == pytest.approx(1e-4)


def test_finite_n_close_to_limit():
    # N = 16 sits about 3 points below the large-N limit at 20 dB
    finite = pd_cfar(scale_for_pfa(1e-4, 16), 16, 100.0)
    assert finite == pytest.approx(pd_limit(1e-4, 100.0), abs=0.035)
    assert finite < pd_limit(1e-4, 100.0)


@pytest.mark.parametrize("pfa", [1e-2, 1e-4, 1e-6])
def test_large_n_converges_to_limit(pfa):
    snr = np.array([0.0, 0.1, 1.0, 10.0, 100.0, 1000.0])
    alpha = scale_for_pfa(pfa, 10_000)
    finite = np.array([pd_cfar(alpha, 10_000, s) for s in snr])
    np.testing.assert_allclose(finite, pd_limit(pfa, snr), atol=1e-3)


def test_invalid_pfa_rejected():
    with pytest.raises(ConfigurationError):
        scale_for_pfa(1.0, 16)
    with pytest.raises(ConfigurationError):
        pd_limit(0.0, 1.0)


def test_negative_snr_rejected():
    with pytest.raises(ConfigurationError):
        pd_cfar(1.0, 16, -1.0)


# ==================================================
# MONTE CARLO
# ==================================================
def test_monte_carlo_needs_enough_trials():
    with pytest.raises(ConfigurationError):
        pd_monte_carlo(0.1, 16, 0.0, trials=999, seed=1)


def test_monte_carlo_is_seeded():
    first = pd_monte_carlo(0.1, 16, 1.0, trials=5000, seed=3, chunk_trials=1000)
    second = pd_monte_carlo(0.1, 16, 1.0, trials=5000, seed=3, chunk_trials=1000)
    assert first == second


def test_huge_snr_always_detects():
    assert pd_monte_carlo(1e-4, 16, 1e6, trials=10_000, seed=2) > 0.999


@pytest.mark.slow
def test_false_alarm_rate_without_target():
    assert pd_monte_carlo(0.1, 16, 0.0, trials=100_000, seed=7) == pytest.approx(0.1, abs=0.01)


@pytest.mark.slow
def test_monte_carlo_matches_analytic():
    trials = 100_000
    expected = pd_cfar(scale_for_pfa(1e-2, 32), 32, 10.0)
    observed = pd_monte_carlo(1e-2, 32, 10.0, trials=trials, seed=11)
    assert abs(observed - expected) <= 3 * binomial_sigma(expected, trials)


# ==================================================
# Pd VERSUS M
# ==================================================
def _short_range():
    return Scenario(range=5.0, rcs=10.0, antenna_gain=3.0)


def test_curve_monotone_in_m():
    curve = pd_vs_m_curve(_short_range(), range(1, 65), 1e-4, processing_gain=512 * 12)
    assert curve.source is CurveSource.ANALYTIC
    assert np.all(np.diff(curve.pd_values) >= 0)
    assert np.all(curve.pd_values >= curve.baseline_pd)
    assert curve.pd_values[0] == pytest.approx(curve.baseline_pd)


def test_larger_pfa_gives_larger_pd():
    m_grid = range(1, 65)
    loose = pd_vs_m_curve(_short_range(), m_grid, 1e-2, processing_gain=512 * 12)
    strict = pd_vs_m_curve(_short_range(), m_grid, 1e-6, processing_gain=512 * 12)
    assert np.all(loose.pd_values > strict.pd_values)


def test_curve_probabilities_in_unit_interval(scenario):
    curve = pd_vs_m_curve(scenario, [1, 8, 64], 1e-2)
    assert np.all((curve.pd_values >= 0) & (curve.pd_values <= 1))
    assert curve.snr_db.shape == (3,)


def test_empty_grid_rejected(scenario):
    with pytest.raises(ConfigurationError):
        pd_vs_m_curve(scenario, [], 1e-2)


def test_simulated_curve_tracks_finite_n_cfar():
    trials = 4000
    curve = pd_vs_m_monte_carlo(_short_range(), [1, 4, 16, 64], 1e-2, 8, trials, seed=3, processing_gain=512 * 12)
    assert curve.source is CurveSource.MONTE_CARLO
    alpha = scale_for_pfa(1e-2, 8)
    for observed, snr in zip(curve.pd_values, curve.snr_linear):
        expected = pd_cfar(alpha, 8, snr)
        assert abs(observed - expected) <= 3 * binomial_sigma(expected, trials) + 1 / trials


def test_simulated_curve_depends_on_reference_cells():
    grid = [1, 2, 4]
    few = pd_vs_m_monte_carlo(_short_range(), grid, 1e-2, 1, 1000, seed=3, processing_gain=512 * 12)
    many = pd_vs_m_monte_carlo(_short_range(), grid, 1e-2, 128, 1000, seed=3, processing_gain=512 * 12)
    assert not np.array_equal(few.pd_values, many.pd_values)


def test_simulated_curve_is_seeded():
    grid = [1, 8]
    first = pd_vs_m_monte_carlo(_short_range(), grid, 1e-4, 16, 2000, seed=5, chunk_trials=700)
    second = pd_vs_m_monte_carlo(_short_range(), grid, 1e-4, 16, 2000, seed=5, chunk_trials=700)
    np.testing.assert_array_equal(first.pd_values, second.pd_values)


def test_simulated_curve_needs_enough_trials(scenario):
    with pytest.raises(ConfigurationError):
        pd_vs_m_monte_carlo(scenario, [1, 2], 1e-2, 16, 999, seed=1)
