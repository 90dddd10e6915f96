from pathlib import Path

import numpy as np
import pandas as pd

from app.errors import OutputError


class ResultSheetManager:
    """
    Writes experiment tables as CSV plus a `.meta` sidecar.

    GUARANTEES:
    - Fixed header schema and column order per experiment
    - Row count checked against the declared grid size
    - Floats in shortest round-trip form, so reruns are byte-identical
    """

    # ==================================================
    # SCHEMAS
    # ==================================================
    SCHEMAS = {
        "snr_vs_m": ["M", "mode", "snr_db"],
        "power_vs_snr": ["snr_db", "M", "echo_power_watts"],
        "pd_vs_m": ["M", "pfa", "pd", "pd_no_irs", "pd_monte_carlo"],
        "mmse_vs_snr": ["snr_db", "M", "mse_m2", "crlb_m2", "rmse_m", "crlb_rmse_m"],
    }

    # ==================================================
    # INIT
    # ==================================================
    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {self.output_dir}: {exc}") from exc

        if not self.output_dir.is_dir():
            raise OutputError(f"output path {self.output_dir} is not a directory")

    # ==================================================
    # INTERNAL HELPERS
    # ==================================================
    @staticmethod
    def _format_cell(value) -> str:
        if isinstance(value, (bool, np.bool_)):
            return str(bool(value)).lower()
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return repr(float(value))
        return str(value)

    def _build_frame(self, table: str, rows: list[dict]) -> pd.DataFrame:
        columns = self.SCHEMAS[table]
        for index, row in enumerate(rows):
            if set(row) != set(columns):
                raise ValueError(
                    f"{table} row {index} has columns {sorted(row)}, expected {columns}"
                )

        frame = pd.DataFrame(rows, columns=columns)
        return frame.apply(lambda column: column.map(self._format_cell)).astype(str)

    # ==================================================
    # WRITE
    # ==================================================
    def path_for(self, table: str, suffix: str = ".csv") -> Path:
        return self.output_dir / f"{table}{suffix}"

    def write(
        self,
        table: str,
        rows: list[dict],
        metadata: dict[str, str],
        expected_rows: int | None = None,
    ) -> Path:
        """
        Writes `<table>.csv` and `<table>.meta`.
        Returns the CSV path.
        """
        if table not in self.SCHEMAS:
            raise KeyError(f"unknown table {table!r}")
        if expected_rows is not None and len(rows) != expected_rows:
            raise ValueError(f"{table}: {len(rows)} rows, grid declares {expected_rows}")

        frame = self._build_frame(table, rows)
        csv_path = self.path_for(table)
        meta_path = self.path_for(table, ".meta")

        meta = dict(metadata)
        meta["rows"] = str(len(rows))
        meta["columns"] = ",".join(self.SCHEMAS[table])
        meta_text = "".join(f"{key}={meta[key]}\n" for key in sorted(meta))

        try:
            frame.to_csv(csv_path, index=False, lineterminator="\n", encoding="utf-8")
            meta_path.write_text(meta_text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise OutputError(f"cannot write {csv_path}: {exc}") from exc

        return csv_path

    def read(self, table: str) -> pd.DataFrame:
        """Loads a written table back with numeric columns parsed."""
        return pd.read_csv(self.path_for(table))
