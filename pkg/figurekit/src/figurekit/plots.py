"""Figure builders mirroring the paper-style figure families: PDR vs data
rate, coverage vs time, and grouped metric bars.

Every figure embeds the exact plotted values as JSON in the image metadata,
so a reviewer can verify the rendering against the source CSV byte for byte.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import SchemaError, load_style, match, read_metrics, read_series  # noqa: E402

_PNG_META_KEY = "figurekit-values"


def _save(fig, out_path: str | Path, values: dict) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(values, sort_keys=True)
    fig.savefig(out_path, metadata={_PNG_META_KEY: payload, "Software": "figurekit"})
    plt.close(fig)
    return out_path


def read_embedded_values(path: str | Path) -> dict:
    """The verbatim source values stored in a figure produced by this module."""
    from PIL import Image

    with Image.open(path) as img:
        payload = img.text.get(_PNG_META_KEY)
    if payload is None:
        raise ValueError(f"{path} carries no embedded figurekit values")
    return json.loads(payload)


def _series_key(scheme: str, speed) -> str:
    return f"{scheme}-{float(speed):g}"


def plot_pdr_vs_rate(
    metrics_csv: str | Path,
    scenario: str,
    n_uavs: int,
    out_path: str | Path,
    failure_pct: float = 0.0,
    style_path: str | Path | None = None,
) -> Path:
    """Line chart of PDR against data rate, one line per (scheme, speed)."""
    rows = [r for r in read_metrics(metrics_csv)
            if match(r, scenario=scenario, n_uavs=n_uavs, failure_pct=failure_pct)]
    if not rows:
        raise SchemaError(f"no rows for scenario={scenario}, n_uavs={n_uavs}")
    style = load_style(style_path)

    lines: dict[str, dict[float, float]] = {}
    for r in rows:
        if r["pdr"] in ("", None):
            continue
        key = _series_key(r["scheme"], r["speed_mps"])
        rate = float(r["data_rate_bps"])
        if rate in lines.setdefault(key, {}):
            raise SchemaError(
                f"duplicate rows for {key} at rate {rate:g}; aggregate seeds "
                "first (swarmpipe report)")
        lines[key][rate] = float(r["pdr"])

    schemes_present = {r["scheme"] for r in rows}
    for scheme in style["scheme_colors"]:
        if scheme not in schemes_present:
            warnings.warn(f"scheme {scheme} missing from {metrics_csv}; plotted with a gap")

    fig, ax = plt.subplots(figsize=style["figsize"], dpi=style["dpi"])
    values = {}
    for key in sorted(lines):
        pts = sorted(lines[key].items())
        scheme, speed = key.rsplit("-", 1)
        ax.plot([x / 1e6 for x, _ in pts], [y for _, y in pts],
                label=key,
                color=style["scheme_colors"].get(scheme),
                linestyle=style["speed_styles"].get(speed, "-"),
                marker="o", markersize=4)
        values[key] = {f"{x:g}": y for x, y in pts}
    ax.set_xlabel("data rate (Mbps)")
    ax.set_ylabel("PDR")
    ax.set_ylim(0.0, 1.0)
    ax.set_title(f"PDR vs data rate ({scenario}, {n_uavs} UAVs)")
    if style["grid"]:
        ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return _save(fig, out_path, values)


def plot_coverage_vs_time(
    series_csv: str | Path,
    scenario: str,
    n_uavs: int,
    speed_mps: float,
    out_path: str | Path,
    seed=None,
    style_path: str | Path | None = None,
) -> Path:
    """Coverage-percent curves over time, one line per scheme."""
    rows = [r for r in read_series(series_csv)
            if r["metric"] == "coverage_pct"
            and match(r, scenario=scenario, n_uavs=n_uavs, speed_mps=speed_mps,
                      seed=seed)]
    if not rows:
        raise SchemaError(f"no coverage series for scenario={scenario}")
    style = load_style(style_path)

    curves: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        curves.setdefault(r["scheme"], []).append((float(r["t"]), float(r["value"])))
    fig, ax = plt.subplots(figsize=style["figsize"], dpi=style["dpi"])
    values = {}
    for scheme in sorted(curves):
        pts = sorted(curves[scheme])
        ax.plot([t for t, _ in pts], [v for _, v in pts], label=scheme,
                color=style["scheme_colors"].get(scheme))
        values[scheme] = [[t, v] for t, v in pts]
    ax.set_xlabel("time (s)")
    ax.set_ylabel("coverage (%)")
    ax.set_ylim(0.0, 100.0)
    ax.set_title(f"Coverage vs time ({scenario}, {n_uavs} UAVs, {speed_mps:g} m/s)")
    if style["grid"]:
        ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return _save(fig, out_path, values)


BAR_METRICS = ("r_u_pct", "r_b", "c_v_pct", "fairness", "avg_route_len")


def plot_bars(
    metrics_csv: str | Path,
    metric: str,
    out_path: str | Path,
    scenarios: list[str] | None = None,
    n_uavs: int | None = None,
    speed_mps: float | None = None,
    data_rate_bps: float | None = None,
    failure_pct: float = 0.0,
    style_path: str | Path | None = None,
) -> Path:
    """Bar chart of one metric, grouped by scenario with scheme clusters."""
    if metric not in BAR_METRICS:
        raise ValueError(f"metric must be one of {BAR_METRICS}")
    rows = [r for r in read_metrics(metrics_csv)
            if match(r, n_uavs=n_uavs, speed_mps=speed_mps,
                     data_rate_bps=data_rate_bps, failure_pct=failure_pct)]
    if scenarios:
        rows = [r for r in rows if r["scenario"] in scenarios]
    rows = [r for r in rows if r.get(metric) not in ("", None)]
    if not rows:
        raise SchemaError(f"no rows with {metric}")
    style = load_style(style_path)

    groups = sorted({r["scenario"] for r in rows})
    schemes = sorted({r["scheme"] for r in rows})
    values: dict[str, dict[str, float]] = {g: {} for g in groups}
    for r in rows:
        g, s = r["scenario"], r["scheme"]
        if s in values[g]:
            raise SchemaError(f"duplicate rows for {g}/{s}; aggregate seeds first")
        values[g][s] = float(r[metric])

    fig, ax = plt.subplots(figsize=style["figsize"], dpi=style["dpi"])
    width = 0.8 / len(schemes)
    for si, scheme in enumerate(schemes):
        xs, ys = [], []
        for gi, g in enumerate(groups):
            if scheme in values[g]:
                xs.append(gi + si * width)
                ys.append(values[g][scheme])
        ax.bar(xs, ys, width=width, label=scheme,
               color=style["scheme_colors"].get(scheme))
    ax.set_xticks([gi + 0.4 - width / 2 for gi in range(len(groups))])
    ax.set_xticklabels(groups)
    ax.set_ylabel(metric)
    ax.set_title(metric)
    if style["grid"]:
        ax.grid(alpha=0.3, axis="y")
    ax.legend(fontsize=8)
    return _save(fig, out_path, values)
