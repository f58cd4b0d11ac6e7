"""CSV access for the simulator's reporting schemas.

This package is a pure post-processor: it reads the metrics and time-series
CSV files by their documented column names and renders the values verbatim.
It never imports the simulator and never recomputes a metric.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

# Documented schema of the run-level metrics CSV.
KEY_COLUMNS = ["scenario", "scheme", "n_uavs", "speed_mps", "data_rate_bps",
               "failure_pct", "seed"]
METRIC_COLUMNS = ["pdr", "r_b", "r_u_pct", "avg_route_len", "c_v_pct",
                  "c_v_window_pct", "fairness", "v_f"]

# Documented schema of the long-format time-series CSV.
SERIES_COLUMNS = KEY_COLUMNS + ["t", "metric", "value"]


class SchemaError(ValueError):
    pass


def read_rows(path: str | Path, required: list[str]) -> list[dict]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty CSV")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_metrics(path: str | Path) -> list[dict]:
    return read_rows(path, KEY_COLUMNS + ["pdr"])


def read_series(path: str | Path) -> list[dict]:
    return read_rows(path, SERIES_COLUMNS)


def match(row: dict, **filters) -> bool:
    for key, want in filters.items():
        if want is None:
            continue
        cell = row.get(key, "")
        try:
            if float(cell) != float(want):
                return False
        except (TypeError, ValueError):
            if str(cell) != str(want):
                return False
    return True


def load_style(path: str | Path | None) -> dict:
    style = {
        "figsize": [6.4, 4.2],
        "dpi": 120,
        "scheme_colors": {
            "TCPipe": "#d62728",
            "Pipe": "#1f77b4",
            "AODV": "#7f7f7f",
            "Relay": "#2ca02c",
        },
        "speed_styles": {"20": "-", "40": "--"},
        "grid": True,
    }
    if path is not None:
        style.update(json.loads(Path(path).read_text()))
    return style
