"""
IRS sensing channel and echo synthesis on the symbol grid.

H_M = sum_m beta_m alpha_m exp(j(theta_m - phi_m)) is held constant over a
frame. The echo applies H_M, a delay phase ramp across subcarriers and a
Doppler phase ramp across symbols; noise is added in the symbol domain.
"""

from dataclasses import dataclass, replace

import numpy as np

from app.config import (
    DEFAULT_ANTENNA_GAIN,
    DEFAULT_CARRIER_FREQUENCY,
    DEFAULT_NOISE_POWER,
    DEFAULT_PATH_LOSS,
    DEFAULT_RANGE,
    DEFAULT_RCS,
    DEFAULT_TRANSMIT_POWER,
    DEFAULT_VELOCITY,
    SPEED_OF_LIGHT,
)
from app.errors import ConfigurationError, DimensionError
from app.waveform.ofdm_frame import FrameConfig, SymbolMatrix


# ==================================================
# DOMAIN TYPES
# ==================================================
@dataclass(frozen=True)
class IrsProfile:
    """
    Per-sub-surface propagation (beta, phi) and reflection (alpha, theta).
    Arrays are stored read-only; use `with_theta` for a new phase vector.
    """

    beta: np.ndarray
    phi: np.ndarray
    alpha: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("beta", "phi", "alpha", "theta"):
            values = np.array(getattr(self, name), dtype=float, copy=True).ravel()
            if not np.all(np.isfinite(values)):
                raise ConfigurationError(f"{name} must be finite", key=f"irs.{name}")
            values.setflags(write=False)
            arrays[name] = values

        lengths = {name: values.size for name, values in arrays.items()}
        if len(set(lengths.values())) != 1:
            raise DimensionError(f"profile arrays must share one length M, got {lengths}")
        if lengths["beta"] < 1:
            raise ConfigurationError("profile needs at least one sub-surface", key="irs.m")
        if np.any(arrays["beta"] < 0):
            raise ConfigurationError("beta_m must be >= 0", key="irs.beta")
        if np.any((arrays["alpha"] < 0) | (arrays["alpha"] > 1)):
            raise ConfigurationError(
                "alpha_m must lie in [0, 1]; a passive surface cannot amplify",
                key="irs.alpha",
            )

        for name, values in arrays.items():
            object.__setattr__(self, name, values)

    @property
    def m_subsurfaces(self) -> int:
        return self.beta.size

    @property
    def weights(self) -> np.ndarray:
        """beta_m * alpha_m."""
        return self.beta * self.alpha


@dataclass(frozen=True)
class Scenario:
    """Physical link of the monostatic radar with the IRS-equipped target."""

    range: float = DEFAULT_RANGE
    velocity: float = DEFAULT_VELOCITY
    transmit_power: float = DEFAULT_TRANSMIT_POWER
    antenna_gain: float = DEFAULT_ANTENNA_GAIN
    rcs: float = DEFAULT_RCS
    carrier_frequency: float = DEFAULT_CARRIER_FREQUENCY
    path_loss_factor: float = DEFAULT_PATH_LOSS
    noise_power: float = DEFAULT_NOISE_POWER
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        checks = [
            ("range", self.range > 0, "range must be > 0"),
            ("transmit_power", self.transmit_power >= 0, "transmit_power must be >= 0"),
            ("antenna_gain", self.antenna_gain >= 0, "antenna_gain must be >= 0"),
            ("rcs", self.rcs >= 0, "rcs must be >= 0"),
            ("carrier_frequency", self.carrier_frequency > 0, "carrier_frequency must be > 0"),
            ("path_loss_factor", self.path_loss_factor >= 1, "path_loss_factor must be >= 1"),
            ("noise_power", self.noise_power > 0, "noise_power must be > 0"),
        ]
        for key, ok, message in checks:
            if not ok:
                raise ConfigurationError(f"{message}, got {getattr(self, key)}", key=f"scenario.{key}")

    @property
    def wavelength(self) -> float:
        return self.speed_of_light / self.carrier_frequency

    @property
    def delay(self) -> float:
        """Round-trip delay tau = 2R/c_0."""
        return 2.0 * self.range / self.speed_of_light

    @property
    def doppler_shift(self) -> float:
        """f_D = 2 nu f_c / c_0."""
        return 2.0 * self.velocity * self.carrier_frequency / self.speed_of_light


# ==================================================
# PROFILE FACTORIES
# ==================================================
def unit_profile(m: int, theta=None, phi=None) -> IrsProfile:
    """beta = alpha = 1; phases default to zero (aligned)."""
    zeros = np.zeros(m)
    return IrsProfile(
        beta=np.ones(m),
        phi=zeros if phi is None else phi,
        alpha=np.ones(m),
        theta=zeros if theta is None else theta,
    )


def aligned_profile(profile: IrsProfile) -> IrsProfile:
    """Same surface with theta = phi."""
    return with_theta(profile, profile.phi)


def random_profile(
    m: int,
    rng: np.random.Generator,
    beta_range: tuple[float, float] = (0.5, 1.0),
    alpha: float = 1.0,
) -> IrsProfile:
    """
    beta ~ U[beta_range], phi ~ U[0, 2pi), theta ~ U[0, 2pi).
    Draw order is beta, phi, theta.
    """
    beta = rng.uniform(beta_range[0], beta_range[1], size=m)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=m)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=m)
    return IrsProfile(beta=beta, phi=phi, alpha=np.full(m, alpha), theta=theta)


def with_theta(profile: IrsProfile, theta) -> IrsProfile:
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != profile.m_subsurfaces:
        raise DimensionError(
            f"theta has length {theta.size}, profile has M={profile.m_subsurfaces}"
        )
    return replace(profile, theta=theta)


# ==================================================
# CHANNEL
# ==================================================
def sensing_channel(profile: IrsProfile) -> complex:
    """H_M = sum_m beta_m alpha_m exp(j(theta_m - phi_m))."""
    return complex(np.sum(profile.weights * np.exp(1j * (profile.theta - profile.phi))))


def echo_phase_ramps(config: FrameConfig, scenario: Scenario) -> np.ndarray:
    """
    exp(-j 2pi n df tau) * exp(+j 2pi mu T f_D) on the (n, mu) grid.
    """
    n = np.arange(config.n_subcarriers)[:, None]
    mu = np.arange(config.n_symbols)[None, :]
    delay_phase = -2.0 * np.pi * n * config.subcarrier_spacing * scenario.delay
    doppler_phase = 2.0 * np.pi * mu * config.symbol_duration * scenario.doppler_shift
    return np.exp(1j * (delay_phase + doppler_phase))


def apply_echo(
    d_tx: SymbolMatrix,
    config: FrameConfig,
    scenario: Scenario,
    h: complex = 1.0,
) -> SymbolMatrix:
    """Noiseless D_Rx: d_tx * h * delay ramp * Doppler ramp."""
    d_tx.require_shape(config)
    return SymbolMatrix(d_tx.entries * complex(h) * echo_phase_ramps(config, scenario))


def add_noise(d_rx: SymbolMatrix, noise_power: float, seed: int = 0) -> SymbolMatrix:
    """
    Adds circularly-symmetric complex Gaussian noise, variance
    `noise_power` per complex sample (half per quadrature).
    """
    if noise_power < 0:
        raise ConfigurationError(f"noise_power must be >= 0, got {noise_power}", key="noise_power")
    if noise_power == 0:
        return SymbolMatrix(d_rx.entries)

    rng = np.random.default_rng(seed)
    return SymbolMatrix(d_rx.entries + complex_gaussian(rng, d_rx.shape, noise_power))


def complex_gaussian(rng: np.random.Generator, shape, power: float = 1.0) -> np.ndarray:
    """CN(0, power) samples."""
    scale = np.sqrt(power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
