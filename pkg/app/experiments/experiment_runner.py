import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from app.channel.irs_channel import Scenario, sensing_channel, unit_profile
from app.config import WORKERS
from app.experiments.experiment_config import ExperimentConfig
from app.processors.crlb import crlb_range
from app.processors.detection import pd_vs_m_curve, pd_vs_m_monte_carlo
from app.processors.estimator import mse_sweep
from app.processors.link_budget import (
    link_factor,
    received_power,
    receiver_snr,
    transmit_power_for_snr,
)
from app.processors.phase_optimizer import OptimizerConfig, optimize
from app.sheets.result_sheet import ResultSheetManager
from app.utils.helpers import child_rng, child_seed, db_to_linear, linear_to_db, map_tasks

logger = logging.getLogger(__name__)

# Stream tags of the seed tree: (seed, stream, index...)
STREAM_PHI = 1
STREAM_RANDOM_THETA = 2
STREAM_OPTIMIZER = 3
STREAM_MSE = 4
STREAM_DETECTION = 5


# ==================================================
# GRID-POINT TASKS (picklable, module level)
# ==================================================
@dataclass(frozen=True)
class _SnrPoint:
    m: int
    modes: tuple
    scenario: Scenario
    optimizer: OptimizerConfig
    random_draws: int
    processing_gain: float
    seed: int


def _snr_point_rows(point: _SnrPoint) -> list[dict]:
    """All coefficient modes at one M; phi ~ U[0, 2pi) from the point's own stream."""
    m = point.m
    phi = child_rng(point.seed, STREAM_PHI, m).uniform(0.0, 2.0 * np.pi, size=m)
    profile = unit_profile(m, phi=phi)
    scale = point.processing_gain * link_factor(point.scenario) / point.scenario.noise_power

    rows = []
    for mode in point.modes:
        if mode == "optimal":
            opt_seed = int(child_seed(point.optimizer.seed, STREAM_OPTIMIZER, m).generate_state(1)[0])
            trace = optimize(profile, point.scenario, replace(point.optimizer, seed=opt_seed))
            snr = point.processing_gain * float(trace.objective[-1])
        elif mode == "random":
            rng = child_rng(point.seed, STREAM_RANDOM_THETA, m)
            theta = rng.uniform(0.0, 2.0 * np.pi, size=(point.random_draws, m))
            channel = np.exp(1j * (theta - phi)).sum(axis=1)
            snr = scale * float(np.mean(np.abs(channel) ** 2))
        else:
            snr = receiver_snr(point.scenario, unit_profile(1), point.processing_gain)

        rows.append({"M": m, "mode": mode, "snr_db": float(linear_to_db(snr))})
    return rows


class ExperimentRunner:
    """
    Runs one configured experiment end to end.

    Responsibilities:
    - Evaluate the experiment over its configured grid
    - Keep every grid point on its own child seed
    - Hand rows to the ResultSheetManager (CSV + .meta)
    - Optionally render the PNG figure
    """

    def __init__(self, config: ExperimentConfig, sheet_manager: ResultSheetManager, workers: int = WORKERS):
        self.config = config
        self.sheet_manager = sheet_manager
        self.workers = max(1, int(workers))

    # ==================================================
    # SNR VERSUS M
    # ==================================================
    def _run_snr_vs_m(self) -> list[dict]:
        cfg = self.config
        points = [
            _SnrPoint(
                m=int(m),
                modes=cfg.irs.coefficient_mode,
                scenario=cfg.scenario,
                optimizer=cfg.optimizer,
                random_draws=cfg.irs.random_draws,
                processing_gain=cfg.processing_gain,
                seed=cfg.seed,
            )
            for m in cfg.irs.m_grid
        ]
        per_point = map_tasks(_snr_point_rows, points, self.workers, desc="SNR vs M")
        return [row for rows in per_point for row in rows]

    # ==================================================
    # ECHO POWER VERSUS SNR
    # ==================================================
    def _run_power_vs_snr(self) -> list[dict]:
        cfg = self.config
        rows = []

        for snr_db in cfg.link.snr_grid_db:
            power = transmit_power_for_snr(cfg.scenario, float(db_to_linear(snr_db)))
            scenario = replace(cfg.scenario, transmit_power=power)

            for m in cfg.irs.m_grid:
                rows.append({
                    "snr_db": float(snr_db),
                    "M": int(m),
                    "echo_power_watts": received_power(scenario, unit_profile(int(m))),
                })

        return rows

    # ==================================================
    # DETECTION PROBABILITY VERSUS M
    # ==================================================
    def _run_pd_vs_m(self) -> list[dict]:
        cfg = self.config
        rows = []

        for index, pfa in enumerate(cfg.detection.pfa_list):
            curve = pd_vs_m_curve(cfg.scenario, cfg.irs.m_grid, pfa, cfg.processing_gain)
            simulated = pd_vs_m_monte_carlo(
                cfg.scenario,
                cfg.irs.m_grid,
                pfa,
                cfg.detection.n_ref,
                cfg.detection.trials,
                int(child_seed(cfg.seed, STREAM_DETECTION, index).generate_state(1)[0]),
                cfg.processing_gain,
                workers=self.workers,
            )
            for m, pd_value, pd_mc in zip(curve.grid, curve.pd_values, simulated.pd_values):
                rows.append({
                    "M": int(m),
                    "pfa": float(pfa),
                    "pd": float(pd_value),
                    "pd_no_irs": float(curve.baseline_pd),
                    "pd_monte_carlo": float(pd_mc),
                })

        return rows

    # ==================================================
    # RANGE MSE VERSUS SNR
    # ==================================================
    def _run_mmse_vs_snr(self) -> list[dict]:
        cfg = self.config
        frame = cfg.frame
        snr_grid = np.asarray(cfg.estimator.snr_grid_db, dtype=float)
        # one trial stream for all M, so curves differ only through H_M
        sweep_seed = int(child_seed(cfg.seed, STREAM_MSE).generate_state(1)[0])

        rows = []
        for m in cfg.irs.m_grid:
            h = sensing_channel(unit_profile(int(m)))
            sweep = mse_sweep(
                frame,
                cfg.scenario,
                snr_grid,
                cfg.estimator.trials,
                sweep_seed,
                h=h,
                weight=cfg.weight,
                padding_factor=cfg.estimator.padding_factor,
                workers=self.workers,
            )

            for snr_db, mse in zip(sweep.snr_db, sweep.mse_range):
                amplitude = float(np.sqrt(db_to_linear(snr_db)))
                bound = crlb_range(
                    amplitude, abs(h), frame.n_subcarriers, frame.n_symbols, frame.subcarrier_spacing
                )
                rows.append({
                    "snr_db": float(snr_db),
                    "M": int(m),
                    "mse_m2": float(mse),
                    "crlb_m2": bound,
                    "rmse_m": float(np.sqrt(mse)),
                    "crlb_rmse_m": float(np.sqrt(bound)),
                })

        return rows

    # ==================================================
    # MAIN PIPELINE
    # ==================================================
    def expected_rows(self) -> int:
        cfg = self.config
        m_count = len(cfg.irs.m_grid)
        return {
            "snr_vs_m": m_count * len(cfg.irs.coefficient_mode),
            "power_vs_snr": len(cfg.link.snr_grid_db) * m_count,
            "pd_vs_m": len(cfg.detection.pfa_list) * m_count,
            "mmse_vs_snr": len(cfg.estimator.snr_grid_db) * m_count,
        }[cfg.experiment]

    def run(self, plots: bool = False):
        experiment = self.config.experiment
        print(f"🔥 Running {experiment} (seed={self.config.seed}, workers={self.workers})")

        handlers = {
            "snr_vs_m": self._run_snr_vs_m,
            "power_vs_snr": self._run_power_vs_snr,
            "pd_vs_m": self._run_pd_vs_m,
            "mmse_vs_snr": self._run_mmse_vs_snr,
        }
        if experiment not in handlers:
            raise ValueError(f"{experiment!r} is not a table-producing experiment")

        rows = handlers[experiment]()
        logger.debug("%s produced %d rows", experiment, len(rows))

        # ----------------------------------------------
        # WRITE CSV + SIDECAR
        # ----------------------------------------------
        print("📤 Writing results...")
        csv_path = self.sheet_manager.write(
            experiment,
            rows,
            self.config.resolved(),
            expected_rows=self.expected_rows(),
        )
        print(f"✅ {csv_path} written ({len(rows)} rows)")

        if plots:
            from app.plots.figures import render

            frame = pd.DataFrame(rows, columns=self.sheet_manager.SCHEMAS[experiment])
            png_path = render(experiment, frame, self.sheet_manager.path_for(experiment, ".png"))
            print(f"✅ {png_path} written")

        return csv_path
