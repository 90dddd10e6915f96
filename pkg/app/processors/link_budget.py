"""
Radar equation with an IRS-equipped target.

    Q_t  = P_t G / (4 pi R^2)
    Q_b  = P_t G sigma |S|^2 / (4 pi R^2)^2
    P_r  = P_t G^2 sigma lambda^2 |S|^2 / ((4 pi)^3 R^4 L)
    gamma = P_r / N_0

with S = sum_m beta_m alpha_m exp(j(theta_m - phi_m)) = H_M.
"""

from dataclasses import dataclass, replace

import numpy as np

from app.channel.irs_channel import IrsProfile, Scenario, aligned_profile, sensing_channel
from app.utils.helpers import linear_to_db


@dataclass(frozen=True)
class LinkBudgetReport:
    q_t: float
    q_b: float
    p_r_ideal: float
    p_r: float
    snr_linear: float
    snr_db: float


# ==================================================
# CONSTANT LINK FACTOR
# ==================================================
def link_factor(scenario: Scenario) -> float:
    """P_t G^2 sigma lambda^2 / ((4 pi)^3 R^4 L): P_r per unit |H_M|^2."""
    return (
        scenario.transmit_power
        * scenario.antenna_gain**2
        * scenario.rcs
        * scenario.wavelength**2
        / ((4.0 * np.pi) ** 3 * scenario.range**4 * scenario.path_loss_factor)
    )


# ==================================================
# POWER CHAIN
# ==================================================
def transmit_power_density(scenario: Scenario) -> float:
    return scenario.transmit_power * scenario.antenna_gain / (4.0 * np.pi * scenario.range**2)


def echo_power_density(scenario: Scenario, profile: IrsProfile) -> float:
    """Echo power density back at the radar, all R_m = R."""
    gain = abs(sensing_channel(profile)) ** 2
    return (
        scenario.transmit_power
        * scenario.antenna_gain
        * scenario.rcs
        * gain
        / (4.0 * np.pi * scenario.range**2) ** 2
    )


def received_power(scenario: Scenario, profile: IrsProfile) -> float:
    return link_factor(scenario) * abs(sensing_channel(profile)) ** 2


def ideal_received_power(scenario: Scenario, profile: IrsProfile) -> float:
    """Coherent superposition: every sub-surface phase aligned."""
    return link_factor(scenario) * float(np.sum(profile.weights)) ** 2


def receiver_snr(
    scenario: Scenario,
    profile: IrsProfile,
    processing_gain: float = 1.0,
) -> float:
    """
    gamma = P_r / N_0, optionally multiplied by a coherent processing
    gain (N_c * N_sym when enabled in the experiment config).
    """
    return processing_gain * received_power(scenario, profile) / scenario.noise_power


def link_budget(
    scenario: Scenario,
    profile: IrsProfile,
    processing_gain: float = 1.0,
) -> LinkBudgetReport:
    snr = receiver_snr(scenario, profile, processing_gain)
    return LinkBudgetReport(
        q_t=transmit_power_density(scenario),
        q_b=echo_power_density(scenario, profile),
        p_r_ideal=ideal_received_power(scenario, profile),
        p_r=received_power(scenario, profile),
        snr_linear=snr,
        snr_db=float(linear_to_db(snr)),
    )


# ==================================================
# HELPERS
# ==================================================
def snr_gain_db(m: int) -> float:
    """SNR gain of M aligned unit sub-surfaces over a single one: 20 lg M."""
    return 20.0 * np.log10(m)


def optimal_snr(scenario: Scenario, profile: IrsProfile) -> float:
    return received_power(scenario, aligned_profile(profile)) / scenario.noise_power


def transmit_power_for_snr(scenario: Scenario, snr_linear: float) -> float:
    """
    P_t giving `snr_linear` for a single unit reflector (no IRS gain).
    Inverts the SNR equation with |H_M| = 1.
    """
    per_watt = link_factor(_with_power(scenario, 1.0)) / scenario.noise_power
    return snr_linear / per_watt


def _with_power(scenario: Scenario, power: float) -> Scenario:
    return replace(scenario, transmit_power=power)
