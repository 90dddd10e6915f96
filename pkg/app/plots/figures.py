"""
Optional PNG figures for the experiment tables. CSV stays the contract;
these are rendered from the same rows after the CSV is written.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from app.errors import OutputError  # noqa: E402


def _figure(width: float = 8, height: float | None = None):
    golden_ratio = (math.sqrt(5) - 1.0) / 2.0
    if not height:
        height = width * golden_ratio
    fig, ax = plt.subplots(figsize=(width, height), facecolor="w")
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


# ==================================================
# PER-EXPERIMENT FIGURES
# ==================================================
def _plot_snr_vs_m(frame: pd.DataFrame, ax) -> None:
    for mode, group in frame.groupby("mode", sort=False):
        ax.plot(group["M"], group["snr_db"], marker=".", label=mode)
    ax.set_xlabel("Number of IRS sub-surfaces M")
    ax.set_ylabel("SNR (dB)")


def _plot_power_vs_snr(frame: pd.DataFrame, ax) -> None:
    for m, group in frame.groupby("M", sort=False):
        ax.semilogy(group["snr_db"], group["echo_power_watts"], marker=".", label=f"M={m}")
    ax.set_xlabel("SNR without IRS (dB)")
    ax.set_ylabel("Echo power (W)")


def _plot_pd_vs_m(frame: pd.DataFrame, ax) -> None:
    for pfa, group in frame.groupby("pfa", sort=False):
        line, = ax.plot(group["M"], group["pd"], marker=".", label=f"IRS, Pfa={pfa:g}")
        ax.plot(group["M"], group["pd_monte_carlo"], "x", color=line.get_color(), label=f"CA-CFAR sim, Pfa={pfa:g}")
        ax.axhline(group["pd_no_irs"].iloc[0], linestyle="--", color=line.get_color(), label=f"no IRS, Pfa={pfa:g}")
    ax.set_xlabel("Number of IRS sub-surfaces M")
    ax.set_ylabel("Detection probability")
    ax.set_ylim(0.0, 1.02)


def _plot_mmse_vs_snr(frame: pd.DataFrame, ax) -> None:
    for m, group in frame.groupby("M", sort=False):
        line, = ax.semilogy(group["snr_db"], group["mse_m2"], marker="o", label=f"MSE, M={m}")
        ax.semilogy(group["snr_db"], group["crlb_m2"], linestyle="--", color=line.get_color(), label=f"CRLB, M={m}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Range MSE (m$^2$)")


PLOTTERS = {
    "snr_vs_m": _plot_snr_vs_m,
    "power_vs_snr": _plot_power_vs_snr,
    "pd_vs_m": _plot_pd_vs_m,
    "mmse_vs_snr": _plot_mmse_vs_snr,
}


def render(table: str, frame: pd.DataFrame, path) -> Path:
    """Draws `frame` for experiment `table` into a PNG at `path`."""
    path = Path(path)
    fig, ax = _figure()
    try:
        PLOTTERS[table](frame, ax)
        ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
    except OSError as exc:
        raise OutputError(f"cannot write figure {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path
