"""
INI experiment configuration.

Sections mirror the experiment's parameter groups. Every key has a default, so an empty
file is a valid snr_vs_m run. Unknown sections/keys and malformed literals raise
ConfigParseError; domain invariant violations raise ConfigurationError.
"""

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from app import config as defaults
from app.channel.irs_channel import Scenario
from app.errors import ConfigParseError, ConfigurationError
from app.processors.detection import MIN_MONTE_CARLO_TRIALS
from app.processors.phase_optimizer import OptimizerConfig
from app.waveform.ofdm_frame import FrameConfig, ModulationWeight

EXPERIMENTS = ("snr_vs_m", "power_vs_snr", "pd_vs_m", "mmse_vs_snr", "validate")
COEFFICIENT_MODES = ("optimal", "random", "none")


# ==================================================
# SETTINGS GROUPS
# ==================================================
@dataclass(frozen=True)
class IrsSettings:
    m_grid: tuple = tuple(range(1, 65))
    coefficient_mode: tuple = COEFFICIENT_MODES
    random_draws: int = 1000


@dataclass(frozen=True)
class LinkSettings:
    processing_gain: bool = False
    snr_grid_db: tuple = tuple(float(v) for v in range(-20, 21, 5))


@dataclass(frozen=True)
class DetectionSettings:
    pfa_list: tuple = (1e-2, 1e-4, 1e-6)
    n_ref: int = 16
    trials: int = defaults.DEFAULT_TRIALS


@dataclass(frozen=True)
class EstimatorSettings:
    padding_factor: int = defaults.DEFAULT_PADDING_FACTOR
    snr_grid_db: tuple = (-30.0, -28.0, -26.0, -24.0, -22.0, -20.0)
    trials: int = defaults.DEFAULT_TRIALS


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "snr_vs_m"
    frame: FrameConfig = field(
        default_factory=lambda: FrameConfig(
            n_subcarriers=defaults.DEFAULT_N_SUBCARRIERS,
            n_symbols=defaults.DEFAULT_N_SYMBOLS,
            subcarrier_spacing=defaults.DEFAULT_SUBCARRIER_SPACING,
            symbol_duration=defaults.DEFAULT_SYMBOL_DURATION,
            carrier_frequency=defaults.DEFAULT_CARRIER_FREQUENCY,
        )
    )
    weight: ModulationWeight = ModulationWeight()
    scenario: Scenario = Scenario()
    irs: IrsSettings = IrsSettings()
    link: LinkSettings = LinkSettings()
    detection: DetectionSettings = DetectionSettings()
    estimator: EstimatorSettings = EstimatorSettings()
    optimizer: OptimizerConfig = OptimizerConfig(seed=defaults.DEFAULT_SEED)
    seed: int = defaults.DEFAULT_SEED
    output_dir: Path = Path("results")

    @property
    def processing_gain(self) -> float:
        """Coherent processing gain multiplier, N_c * N_sym when enabled."""
        if not self.link.processing_gain:
            return 1.0
        return float(self.frame.n_subcarriers * self.frame.n_symbols)

    def resolved(self) -> dict[str, str]:
        """Flat section.key -> value view, as recorded in the .meta sidecar."""
        frame, scenario, opt = self.frame, self.scenario, self.optimizer
        items = {
            "experiment.name": self.experiment,
            "experiment.seed": self.seed,
            "experiment.output_dir": self.output_dir.as_posix(),
            "frame.n_subcarriers": frame.n_subcarriers,
            "frame.n_symbols": frame.n_symbols,
            "frame.subcarrier_spacing": frame.subcarrier_spacing,
            "frame.symbol_duration": frame.symbol_duration,
            "frame.carrier_frequency": frame.carrier_frequency,
            "frame.modulation_weight": self.weight.value,
            "scenario.range": scenario.range,
            "scenario.velocity": scenario.velocity,
            "scenario.transmit_power": scenario.transmit_power,
            "scenario.antenna_gain": scenario.antenna_gain,
            "scenario.rcs": scenario.rcs,
            "scenario.path_loss_factor": scenario.path_loss_factor,
            "scenario.noise_power": scenario.noise_power,
            "irs.m_grid": _join(self.irs.m_grid),
            "irs.coefficient_mode": _join(self.irs.coefficient_mode),
            "irs.random_draws": self.irs.random_draws,
            "link.processing_gain": str(self.link.processing_gain).lower(),
            "link.snr_grid_db": _join(self.link.snr_grid_db),
            "detection.pfa_list": _join(self.detection.pfa_list),
            "detection.n_ref": self.detection.n_ref,
            "detection.trials": self.detection.trials,
            "estimator.padding_factor": self.estimator.padding_factor,
            "estimator.snr_grid_db": _join(self.estimator.snr_grid_db),
            "estimator.trials": self.estimator.trials,
            "optimizer.learning_rate": opt.learning_rate,
            "optimizer.max_iterations": opt.max_iterations,
            "optimizer.minibatch_size": "auto" if opt.minibatch_size is None else opt.minibatch_size,
            "optimizer.tolerance_db": opt.tolerance_db,
            "optimizer.seed": opt.seed,
        }
        return {key: _format(value) for key, value in items.items()}


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    return str(value)


def _join(values) -> str:
    return ",".join(_format(v) for v in values)


# ==================================================
# LITERAL PARSERS
# ==================================================
def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple:
    return tuple(float(part) for part in _split(text))


def _parse_str_list(text: str) -> tuple:
    return tuple(part.lower() for part in _split(text))


def _parse_m_grid(text: str) -> tuple:
    """'1..64', '1,2,4,8' or a mix like '1..4, 8, 16'."""
    values = []
    for part in _split(text):
        if ".." in part:
            low, high = (int(v) for v in part.split("..", 1))
            values.extend(range(low, high + 1))
        else:
            values.append(int(part))
    return tuple(values)


def _parse_optional_int(text: str) -> int | None:
    return None if text.strip().lower() in {"", "auto", "none"} else int(text)


def _split(text: str) -> list[str]:
    parts = [part.strip() for part in text.replace("\n", ",").split(",")]
    parts = [part for part in parts if part]
    if not parts:
        raise ValueError("empty list")
    return parts


SCHEMA: dict[str, dict[str, Callable[[str], object]]] = {
    "experiment": {"name": str.strip, "seed": _parse_int, "output_dir": str.strip},
    "frame": {
        "n_subcarriers": _parse_int,
        "n_symbols": _parse_int,
        "subcarrier_spacing": _parse_float,
        "symbol_duration": _parse_float,
        "carrier_frequency": _parse_float,
        "modulation_weight": lambda text: complex(text.replace(" ", "")),
    },
    "scenario": {
        "range": _parse_float,
        "velocity": _parse_float,
        "transmit_power": _parse_float,
        "antenna_gain": _parse_float,
        "rcs": _parse_float,
        "path_loss_factor": _parse_float,
        "noise_power": _parse_float,
    },
    "irs": {"m_grid": _parse_m_grid, "coefficient_mode": _parse_str_list, "random_draws": _parse_int},
    "link": {"processing_gain": _parse_bool, "snr_grid_db": _parse_float_list},
    "detection": {"pfa_list": _parse_float_list, "n_ref": _parse_int, "trials": _parse_int},
    "estimator": {"padding_factor": _parse_int, "snr_grid_db": _parse_float_list, "trials": _parse_int},
    "optimizer": {
        "learning_rate": _parse_float,
        "max_iterations": _parse_int,
        "minibatch_size": _parse_optional_int,
        "tolerance_db": _parse_float,
        "seed": _parse_int,
    },
}


# ==================================================
# LOADING
# ==================================================
def _read_values(text: str, source: str) -> dict[str, dict[str, object]]:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str

    try:
        parser.read_string(text, source=source)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigParseError(f"{source}: cannot parse line {line}", line=line) from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigParseError(f"{source}: {exc.message}", line=exc.lineno) from exc
    except configparser.Error as exc:
        raise ConfigParseError(f"{source}: {exc}") from exc

    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigParseError(f"{source}: unknown section [{section}]", key=section)
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigParseError(f"{source}: unknown key {section}.{key}", key=f"{section}.{key}")
            try:
                values[section][key] = SCHEMA[section][key](raw)
            except ValueError as exc:
                raise ConfigParseError(
                    f"{source}: bad value for {section}.{key}: {raw!r} ({exc})",
                    key=f"{section}.{key}",
                ) from exc
    return values


def build_config(values: dict[str, dict[str, object]]) -> ExperimentConfig:
    """Overlay parsed values on the defaults and validate invariants."""
    base = ExperimentConfig()
    section = lambda name: values.get(name, {})  # noqa: E731

    experiment = section("experiment").get("name", base.experiment)
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(
            f"experiment.name must be one of {', '.join(EXPERIMENTS)}, got {experiment!r}",
            key="experiment.name",
        )
    seed = section("experiment").get("seed", base.seed)

    frame_values = dict(section("frame"))
    weight = ModulationWeight(frame_values.pop("modulation_weight", base.weight.value))
    frame = replace(base.frame, **frame_values)
    scenario = replace(base.scenario, carrier_frequency=frame.carrier_frequency, **section("scenario"))

    irs = replace(base.irs, **section("irs"))
    if not irs.m_grid or min(irs.m_grid) < 1:
        raise ConfigurationError("irs.m_grid entries must be >= 1", key="irs.m_grid")
    unknown_modes = set(irs.coefficient_mode) - set(COEFFICIENT_MODES)
    if unknown_modes:
        raise ConfigurationError(
            f"irs.coefficient_mode has unknown modes {sorted(unknown_modes)}", key="irs.coefficient_mode"
        )
    if irs.random_draws < 1:
        raise ConfigurationError("irs.random_draws must be >= 1", key="irs.random_draws")

    link = replace(base.link, **section("link"))

    detection = replace(base.detection, **section("detection"))
    if any(not 0.0 < p < 1.0 for p in detection.pfa_list):
        raise ConfigurationError("detection.pfa_list entries must lie in (0, 1)", key="detection.pfa_list")
    if detection.n_ref < 1:
        raise ConfigurationError("detection.n_ref must be >= 1", key="detection.n_ref")
    if detection.trials < MIN_MONTE_CARLO_TRIALS:
        raise ConfigurationError(
            f"detection.trials must be >= {MIN_MONTE_CARLO_TRIALS}", key="detection.trials"
        )

    estimator = replace(base.estimator, **section("estimator"))
    if estimator.padding_factor < 1:
        raise ConfigurationError("estimator.padding_factor must be >= 1", key="estimator.padding_factor")
    if estimator.trials < 1:
        raise ConfigurationError("estimator.trials must be >= 1", key="estimator.trials")
    if np.any(np.isnan(estimator.snr_grid_db)) or np.any(np.isnan(link.snr_grid_db)):
        raise ConfigurationError("SNR grids must not contain NaN", key="estimator.snr_grid_db")

    optimizer_values = dict(section("optimizer"))
    optimizer_values.setdefault("seed", seed)
    optimizer = replace(base.optimizer, **optimizer_values)
    if optimizer.minibatch_size is not None and optimizer.minibatch_size > min(irs.m_grid):
        raise ConfigurationError(
            f"optimizer.minibatch_size must be <= smallest M ({min(irs.m_grid)})",
            key="optimizer.minibatch_size",
        )

    return ExperimentConfig(
        experiment=experiment,
        frame=frame,
        weight=weight,
        scenario=scenario,
        irs=irs,
        link=link,
        detection=detection,
        estimator=estimator,
        optimizer=optimizer,
        seed=seed,
        output_dir=Path(section("experiment").get("output_dir", base.output_dir)),
    )


def load_experiment_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    return build_config(_read_values(text, str(path)))


def with_overrides(
    config: ExperimentConfig,
    output_dir=None,
    seed: int | None = None,
) -> ExperimentConfig:
    """CLI / environment overrides on top of the file."""
    if seed is not None:
        config = replace(config, seed=seed, optimizer=replace(config.optimizer, seed=seed))
    if output_dir is not None:
        config = replace(config, output_dir=Path(output_dir))
    return config
