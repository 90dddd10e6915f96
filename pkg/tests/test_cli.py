from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import app.main as cli
from app.experiments.experiment_config import load_experiment_config
from app.experiments.validation import run_validation
from app.processors.estimator import range_bin_width

CONFIGS_DIR = Path(__file__).resolve().parent.parent / "configs"

SMALL_FRAME = """
[frame]
n_subcarriers = 64
n_symbols = 8
"""


def _config(tmp_path, body: str, name: str = "experiment.ini"):
    path = tmp_path / name
    path.write_text(body, encoding="utf-8")
    return path


def _run(config_path, output_dir, *extra) -> int:
    return cli.main(["run", str(config_path), "--output-dir", str(output_dir), *extra])


# ==================================================
# RUN
# ==================================================
def test_snr_vs_m_rows_and_ordering(tmp_path):
    config = _config(tmp_path, """
[experiment]
name = snr_vs_m

[irs]
m_grid = 1..8
random_draws = 200
""")
    assert _run(config, tmp_path / "out") == 0

    frame = pd.read_csv(tmp_path / "out" / "snr_vs_m.csv")
    assert list(frame.columns) == ["M", "mode", "snr_db"]
    assert len(frame) == 8 * 3

    table = frame.pivot(index="M", columns="mode", values="snr_db")
    above_one = table.loc[2:]
    assert (above_one["optimal"] >= above_one["random"]).all()
    assert (above_one["random"] >= above_one["none"]).all()


def test_rerun_is_byte_identical(tmp_path):
    config = _config(tmp_path, "[experiment]\nname = snr_vs_m\n\n[irs]\nm_grid = 1..6\nrandom_draws = 50\n")
    assert _run(config, tmp_path / "a") == 0
    assert _run(config, tmp_path / "b") == 0
    for suffix in (".csv", ".meta"):
        first = (tmp_path / "a" / f"snr_vs_m{suffix}").read_bytes()
        second = (tmp_path / "b" / f"snr_vs_m{suffix}").read_bytes()
        if suffix == ".meta":
            first = first.replace(str(tmp_path / "a").encode(), b"")
            second = second.replace(str(tmp_path / "b").encode(), b"")
        assert first == second


def test_power_vs_snr_is_linear_in_snr(tmp_path):
    config = _config(tmp_path, """
[experiment]
name = power_vs_snr

[irs]
m_grid = 1, 4

[link]
snr_grid_db = 0, 10
""")
    assert _run(config, tmp_path) == 0
    frame = pd.read_csv(tmp_path / "power_vs_snr.csv")
    assert list(frame.columns) == ["snr_db", "M", "echo_power_watts"]
    power = frame.set_index(["snr_db", "M"])["echo_power_watts"]
    assert power[(10.0, 1)] == pytest.approx(10 * power[(0.0, 1)])
    assert power[(0.0, 4)] == pytest.approx(16 * power[(0.0, 1)])
    # without IRS the echo power at 0 dB equals the noise power
    assert power[(0.0, 1)] == pytest.approx(0.8)


def test_pd_vs_m_curves(tmp_path):
    config = _config(tmp_path, """
[experiment]
name = pd_vs_m

[scenario]
range = 5
rcs = 10
antenna_gain = 3

[irs]
m_grid = 1..16

[link]
processing_gain = true

[detection]
pfa_list = 1e-2, 1e-4, 1e-6
""")
    assert _run(config, tmp_path) == 0
    frame = pd.read_csv(tmp_path / "pd_vs_m.csv")
    assert list(frame.columns) == ["M", "pfa", "pd", "pd_no_irs", "pd_monte_carlo"]
    assert len(frame) == 3 * 16

    curves = {pfa: group["pd"].to_numpy() for pfa, group in frame.groupby("pfa")}
    for values in curves.values():
        assert (values[1:] >= values[:-1]).all()
    assert (curves[1e-2] > curves[1e-4]).all()
    assert (curves[1e-4] > curves[1e-6]).all()
    assert (frame["pd"] >= frame["pd_no_irs"]).all()
    assert frame["pd_monte_carlo"].between(0.0, 1.0).all()


def test_mmse_vs_snr_columns(tmp_path):
    config = _config(tmp_path, SMALL_FRAME + """
[experiment]
name = mmse_vs_snr

[irs]
m_grid = 1, 4

[estimator]
snr_grid_db = -10, 0
trials = 5
padding_factor = 4
""")
    assert _run(config, tmp_path) == 0
    frame = pd.read_csv(tmp_path / "mmse_vs_snr.csv")
    assert list(frame.columns) == ["snr_db", "M", "mse_m2", "crlb_m2", "rmse_m", "crlb_rmse_m"]
    assert len(frame) == 2 * 2
    np.testing.assert_allclose(frame["rmse_m"] ** 2, frame["mse_m2"], rtol=1e-12)
    at_0db = frame[frame["snr_db"] == 0.0].set_index("M")["crlb_m2"]
    assert at_0db[4] == pytest.approx(at_0db[1] / 16)


def test_reference_cells_and_trials_reach_pd_table(tmp_path):
    body = "[experiment]\nname = pd_vs_m\n\n[irs]\nm_grid = 1..4\n\n[link]\nprocessing_gain = true\n\n[scenario]\nrange = 5\n"
    few = _config(tmp_path, body + "\n[detection]\nn_ref = 1\ntrials = 1000\n", "few.ini")
    many = _config(tmp_path, body + "\n[detection]\nn_ref = 128\ntrials = 5000\n", "many.ini")
    assert _run(few, tmp_path / "few") == 0
    assert _run(many, tmp_path / "many") == 0

    first = pd.read_csv(tmp_path / "few" / "pd_vs_m.csv")
    second = pd.read_csv(tmp_path / "many" / "pd_vs_m.csv")
    pd.testing.assert_series_equal(first["pd"], second["pd"])
    assert not first["pd_monte_carlo"].equals(second["pd_monte_carlo"])


def test_optimizer_seed_reaches_snr_table(tmp_path):
    body = "[irs]\nm_grid = 8, 16\ncoefficient_mode = optimal\n\n[optimizer]\nseed = {}\n"
    assert _run(_config(tmp_path, body.format(1), "one.ini"), tmp_path / "one") == 0
    assert _run(_config(tmp_path, body.format(987654), "two.ini"), tmp_path / "two") == 0

    first = pd.read_csv(tmp_path / "one" / "snr_vs_m.csv")
    second = pd.read_csv(tmp_path / "two" / "snr_vs_m.csv")
    assert not first["snr_db"].equals(second["snr_db"])


def test_seed_override_lands_in_meta(tmp_path):
    config = _config(tmp_path, "[irs]\nm_grid = 1, 2\nrandom_draws = 10\n")
    assert _run(config, tmp_path, "--seed", "99") == 0
    meta = (tmp_path / "snr_vs_m.meta").read_text(encoding="utf-8")
    assert "experiment.seed=99\n" in meta


def test_plots_flag_writes_png(tmp_path):
    config = _config(tmp_path, "[experiment]\nname = power_vs_snr\n\n[irs]\nm_grid = 1, 4\n")
    assert _run(config, tmp_path, "--plots") == 0
    assert (tmp_path / "power_vs_snr.png").stat().st_size > 0


def test_environment_output_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "OUTPUT_DIR_OVERRIDE", str(tmp_path / "from_env"))
    config = _config(tmp_path, "[experiment]\nname = power_vs_snr\n\n[irs]\nm_grid = 1\n")
    assert cli.main(["run", str(config)]) == 0
    assert (tmp_path / "from_env" / "power_vs_snr.csv").exists()


# ==================================================
# EXIT CODES
# ==================================================
def test_parse_error_exits_2(tmp_path):
    config = _config(tmp_path, "[irs]\nm_grid = 1..4\nmystery = 1\n")
    assert _run(config, tmp_path) == 2


def test_invariant_violation_exits_3(tmp_path, capsys):
    config = _config(tmp_path, "[scenario]\nnoise_power = -1\n")
    assert _run(config, tmp_path) == 3
    assert "scenario.noise_power" in capsys.readouterr().err


def test_unwritable_output_exits_4(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x", encoding="utf-8")
    config = _config(tmp_path, "[experiment]\nname = power_vs_snr\n")
    assert _run(config, blocker / "out") == 4


# ==================================================
# SHIPPED CONFIGS
# ==================================================
@pytest.mark.parametrize("path", sorted(CONFIGS_DIR.glob("*.ini")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    assert load_experiment_config(path).experiment == path.stem


def test_shipped_mse_target_sits_between_range_bins():
    config = load_experiment_config(CONFIGS_DIR / "mmse_vs_snr.ini")
    bins = config.scenario.range / range_bin_width(config.frame, config.estimator.padding_factor)
    assert abs(bins - round(bins)) == pytest.approx(0.5, abs=0.01)


@pytest.mark.slow
def test_shipped_mse_run_stays_above_crlb(tmp_path):
    assert _run(CONFIGS_DIR / "mmse_vs_snr.ini", tmp_path) == 0
    frame = pd.read_csv(tmp_path / "mmse_vs_snr.csv")
    assert len(frame) == 3 * 6
    below = frame[frame["mse_m2"] < frame["crlb_m2"]]
    assert below.empty, below.to_string()


# ==================================================
# VALIDATE
# ==================================================
def test_fast_oracles_pass():
    results = run_validation(
        quick=True,
        only=(
            "snr_gain",
            "cfar_roundtrip",
            "pd_vs_m",
            "pd_vs_m_monte_carlo",
            "fisher_oracle",
            "crlb_scaling",
            "estimator_resolution",
        ),
    )
    assert len(results) == 7
    failures = [f"{r.name}: {r.detail}" for r in results if not r.passed]
    assert not failures


@pytest.mark.slow
def test_quick_validate_command_passes(capsys):
    assert cli.main(["validate", "--quick"]) == 0
    assert "❌" not in capsys.readouterr().out


@pytest.mark.slow
def test_full_validation_suite_passes():
    results = run_validation(quick=False)
    failures = [f"{r.name}: {r.detail}" for r in results if not r.passed]
    assert not failures
