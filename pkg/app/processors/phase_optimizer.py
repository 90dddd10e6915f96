"""
IRS phase design: maximize receiver SNR over theta.

gamma(theta) = link_factor / N_0 * |sum_m w_m exp(j(theta_m - phi_m))|^2,
w_m = beta_m alpha_m. The optimum is theta = phi; stochastic minibatch
gradient ascent reaches it numerically and the closed form checks it.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from app.channel.irs_channel import IrsProfile, Scenario, with_theta
from app.errors import ConfigurationError, DimensionError
from app.processors.link_budget import link_factor, optimal_snr
from app.utils.helpers import linear_to_db

logger = logging.getLogger(__name__)

MAX_BACKTRACKS = 30


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.1
    max_iterations: int = 2000
    minibatch_size: int | None = None  # None -> ceil(M / 4)
    tolerance_db: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be > 0", key="optimizer.learning_rate")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be a positive integer", key="optimizer.max_iterations")
        if self.minibatch_size is not None and self.minibatch_size < 1:
            raise ConfigurationError("minibatch_size must be >= 1", key="optimizer.minibatch_size")
        if not self.tolerance_db > 0:
            raise ConfigurationError("tolerance_db must be > 0", key="optimizer.tolerance_db")

    def batch_size(self, m: int) -> int:
        if self.minibatch_size is None:
            return max(1, -(-m // 4))
        if self.minibatch_size > m:
            raise ConfigurationError(
                f"minibatch_size {self.minibatch_size} exceeds M={m}", key="optimizer.minibatch_size"
            )
        return int(self.minibatch_size)


@dataclass(frozen=True)
class OptimizationTrace:
    objective: np.ndarray
    theta: np.ndarray
    iterations_used: int
    converged: bool
    optimum: float = field(default=0.0)

    @property
    def gap_db(self) -> float:
        """Distance of the final objective from the closed-form optimum."""
        return float(linear_to_db(self.optimum) - linear_to_db(self.objective[-1]))


def _check_theta(theta, profile: IrsProfile) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != profile.m_subsurfaces:
        raise DimensionError(
            f"theta has length {theta.size}, profile has M={profile.m_subsurfaces}"
        )
    return theta


def _coherent_sum(theta: np.ndarray, profile: IrsProfile) -> complex:
    return complex(np.sum(profile.weights * np.exp(1j * (theta - profile.phi))))


# ==================================================
# OBJECTIVE + GRADIENT
# ==================================================
def objective(theta, profile: IrsProfile, scenario: Scenario) -> float:
    theta = _check_theta(theta, profile)
    return link_factor(scenario) / scenario.noise_power * abs(_coherent_sum(theta, profile)) ** 2


def gradient(theta, profile: IrsProfile, scale: float = 1.0) -> np.ndarray:
    """
    d|S|^2 / d theta_k = -2 w_k Im(exp(j(theta_k - phi_k)) conj(S)), times `scale`
    (link_factor / N_0 turns it into the SNR gradient).
    """
    theta = _check_theta(theta, profile)
    terms = profile.weights * np.exp(1j * (theta - profile.phi))
    total = terms.sum()
    return scale * -2.0 * np.imag(terms * np.conj(total))


def closed_form_optimum(profile: IrsProfile, scenario: Scenario) -> tuple[np.ndarray, float]:
    """theta = phi aligns every sub-surface."""
    return profile.phi.copy(), optimal_snr(scenario, profile)


# ==================================================
# STOCHASTIC GRADIENT ASCENT
# ==================================================
def optimize(
    profile: IrsProfile,
    scenario: Scenario,
    opt_config: OptimizerConfig = OptimizerConfig(),
    theta0=None,
) -> OptimizationTrace:
    """
    Random-minibatch gradient ascent on the phases.

    Ascent runs on |S|^2 / sum(w_m^2), the SNR relative to its
    random-phase mean, so learning_rate is dimensionless. A step that
    lowers the objective is retried at half the rate.
    """
    m = profile.m_subsurfaces
    batch = opt_config.batch_size(m)
    rng = np.random.default_rng(opt_config.seed)

    theta = rng.uniform(0.0, 2.0 * np.pi, size=m) if theta0 is None else _check_theta(theta0, profile)

    weights_energy = float(np.sum(profile.weights**2))
    _, optimum = closed_form_optimum(profile, scenario)

    def converged(value: float) -> bool:
        if optimum <= 0:
            return True
        if value <= 0:
            return False
        return float(linear_to_db(optimum) - linear_to_db(value)) <= opt_config.tolerance_db

    current = objective(theta, profile, scenario)
    history = [current]
    done = converged(current)
    iterations = 0

    while not done and iterations < opt_config.max_iterations:
        iterations += 1
        indices = rng.choice(m, size=batch, replace=False)
        grad = gradient(theta, profile) / weights_energy

        rate = opt_config.learning_rate
        for _ in range(MAX_BACKTRACKS):
            candidate = theta.copy()
            candidate[indices] += rate * grad[indices]
            value = objective(candidate, profile, scenario)
            if value >= current:
                theta, current = candidate, value
                break
            rate /= 2.0

        history.append(current)
        done = converged(current)

    if not done:
        logger.warning(
            "phase optimizer stopped after %d iterations, %.3f dB from optimum",
            iterations,
            float(linear_to_db(optimum) - linear_to_db(current)) if current > 0 else float("inf"),
        )

    return OptimizationTrace(
        objective=np.array(history),
        theta=np.mod(theta, 2.0 * np.pi),
        iterations_used=iterations,
        converged=done,
        optimum=optimum,
    )


def optimized_profile(profile: IrsProfile, scenario: Scenario, opt_config: OptimizerConfig) -> IrsProfile:
    return with_theta(profile, optimize(profile, scenario, opt_config).theta)
