import itertools

import numpy as np
import pytest

from app.channel.irs_channel import (
    IrsProfile,
    Scenario,
    add_noise,
    aligned_profile,
    apply_echo,
    echo_phase_ramps,
    random_profile,
    sensing_channel,
    unit_profile,
    with_theta,
)
from app.errors import ConfigurationError, DimensionError
from app.waveform.ofdm_frame import build_frame


# ==================================================
# PROFILE
# ==================================================
def test_profile_arrays_must_share_length():
    with pytest.raises(DimensionError):
        IrsProfile(beta=[1, 1], phi=[0, 0], alpha=[1], theta=[0, 0])


def test_passive_surface_cannot_amplify():
    with pytest.raises(ConfigurationError) as excinfo:
        IrsProfile(beta=[1], phi=[0], alpha=[1.5], theta=[0])
    assert excinfo.value.key == "irs.alpha"


def test_negative_beta_rejected():
    with pytest.raises(ConfigurationError):
        IrsProfile(beta=[-0.1], phi=[0], alpha=[1], theta=[0])


def test_random_profile_ranges():
    profile = random_profile(32, np.random.default_rng(0))
    assert np.all((profile.beta >= 0.5) & (profile.beta <= 1.0))
    assert np.all((profile.phi >= 0) & (profile.phi < 2 * np.pi))
    assert np.all(profile.alpha == 1.0)


def test_with_theta_checks_length():
    with pytest.raises(DimensionError):
        with_theta(unit_profile(3), [0.0, 1.0])


# ==================================================
# SENSING CHANNEL
# ==================================================
def test_single_aligned_element():
    assert sensing_channel(unit_profile(1)) == pytest.approx(1.0)


def test_four_aligned_elements_add_coherently():
    phi = np.array([0.1, 1.2, 2.3, 3.4])
    assert sensing_channel(unit_profile(4, theta=phi, phi=phi)) == pytest.approx(4.0)


def test_aligned_channel_is_real_sum_of_weights():
    profile = aligned_profile(random_profile(6, np.random.default_rng(3)))
    h = sensing_channel(profile)
    assert h.imag == pytest.approx(0.0, abs=1e-12)
    assert h.real == pytest.approx(np.sum(profile.weights))


def test_triangle_inequality_on_phase_grid():
    profile = random_profile(3, np.random.default_rng(7))
    bound = np.sum(profile.weights)
    levels = 2 * np.pi * np.arange(16) / 16
    for theta in itertools.product(levels, repeat=3):
        assert abs(sensing_channel(with_theta(profile, theta))) <= bound + 1e-12


# ==================================================
# ECHO
# ==================================================
def test_static_target_at_zero_range_is_identity(small_frame):
    scenario = Scenario(range=1e-30, velocity=0.0)
    d_tx = build_frame(small_frame, seed=1)
    np.testing.assert_allclose(apply_echo(d_tx, small_frame, scenario).entries, d_tx.entries, atol=1e-12)


def test_delay_phase_per_subcarrier(default_frame):
    scenario = Scenario(range=50.0, velocity=0.0)
    ramps = echo_phase_ramps(default_frame, scenario)
    assert np.angle(ramps[1, 0]) == pytest.approx(-0.062875, rel=1e-4)


def test_doppler_phase_per_symbol(default_frame):
    scenario = Scenario(range=1e-30, velocity=20.0)
    ramps = echo_phase_ramps(default_frame, scenario)
    assert np.angle(ramps[0, 1]) == pytest.approx(0.164708, rel=1e-4)


def test_echo_scales_magnitude_by_h(small_frame, scenario):
    d_tx = build_frame(small_frame, seed=2)
    h = 0.3 - 1.1j
    out = apply_echo(d_tx, small_frame, scenario, h)
    np.testing.assert_allclose(np.abs(out.entries), abs(h) * np.abs(d_tx.entries), rtol=1e-12)


def test_echo_ramps_compose(small_frame):
    d_tx = build_frame(small_frame, seed=4)
    first = Scenario(range=30.0, velocity=5.0)
    second = Scenario(range=20.0, velocity=-12.0)
    total = Scenario(range=50.0, velocity=-7.0)
    twice = apply_echo(apply_echo(d_tx, small_frame, first), small_frame, second)
    once = apply_echo(d_tx, small_frame, total)
    np.testing.assert_allclose(twice.entries, once.entries, atol=1e-12)


# ==================================================
# NOISE
# ==================================================
def test_zero_noise_is_identity(small_frame):
    d_tx = build_frame(small_frame, seed=1)
    np.testing.assert_array_equal(add_noise(d_tx, 0.0).entries, d_tx.entries)


def test_noise_variance(default_frame):
    d_tx = build_frame(default_frame, seed=1)
    noisy = add_noise(d_tx, 0.8, seed=9)
    variance = np.mean(np.abs(noisy.entries - d_tx.entries) ** 2)
    assert variance == pytest.approx(0.8, rel=0.05)


def test_noise_is_seeded(small_frame):
    d_tx = build_frame(small_frame, seed=1)
    np.testing.assert_array_equal(add_noise(d_tx, 1.0, seed=3).entries, add_noise(d_tx, 1.0, seed=3).entries)


def test_negative_noise_rejected(small_frame):
    with pytest.raises(ConfigurationError):
        add_noise(build_frame(small_frame), -1.0)
