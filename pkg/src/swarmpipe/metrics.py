"""Routing and coverage metrics computed from event logs and world traces,
plus the CSV schemas the reporting pipeline exchanges.

Routing: packet delivery ratio (PDR), route breaks per flow (R_b), and the
percentage of time a valid route to the BS exists (R_u). Coverage: percent
of cells visited at least once (C_v), Jain fairness of per-cell scan counts
(F), and mean scans per cell (V_f).
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def pdr(delivered: int, generated: int) -> float | None:
    """Delivered/generated for one flow; None when nothing was generated."""
    if generated == 0:
        return None
    return delivered / generated


def aggregate_pdr(flow_pdrs: Iterable[float | None]) -> float | None:
    vals = [p for p in flow_pdrs if p is not None]
    if not vals:
        return None
    return sum(vals) / len(vals)


def route_breaks(events: Iterable[tuple], window: tuple[float, float]) -> int:
    """Break events within the window; proactive switches never count."""
    a, b = window
    return sum(1 for t, kind in events if kind == "break" and a <= t < b)


def route_up(intervals: Sequence[tuple[float, float]], window: tuple[float, float]) -> float:
    """Percent of the window covered by the union of route-valid intervals."""
    a, b = window
    if b <= a:
        raise ValueError("empty window")
    clipped = sorted(
        (max(s, a), min(e, b)) for s, e in intervals if min(e, b) > max(s, a)
    )
    covered = 0.0
    cur_s, cur_e = None, None
    for s, e in clipped:
        if cur_e is None or s > cur_e:
            if cur_e is not None:
                covered += cur_e - cur_s
            cur_s, cur_e = s, e
        else:
            cur_e = max(cur_e, e)
    if cur_e is not None:
        covered += cur_e - cur_s
    return 100.0 * covered / (b - a)


def jain_fairness(x: np.ndarray) -> tuple[float, bool]:
    """Jain's index (sum x)^2 / (n * sum x^2); (0.0, True) when all-zero."""
    x = np.asarray(x, dtype=float).ravel()
    sq_sum = float((x * x).sum())
    if sq_sum == 0.0:
        return 0.0, True
    s = float(x.sum())
    return (s * s) / (x.size * sq_sum), False


def coverage_and_fairness(scan_counts: np.ndarray) -> tuple[float, float, float, bool]:
    """(C_v percent, Jain F, V_f mean visits/cell, all-zero flag)."""
    counts = np.asarray(scan_counts)
    c_v = 100.0 * float((counts >= 1).mean())
    f, zero = jain_fairness(counts)
    v_f = float(counts.mean())
    return c_v, f, v_f, zero


# ---------------------------------------------------------------------------
# Report structures and CSV schemas
# ---------------------------------------------------------------------------

@dataclass
class FlowReport:
    flow: int
    generated: int = 0
    delivered: int = 0
    expired: int = 0
    dropped_break: int = 0
    inflight_end: int = 0
    pdr: float | None = None
    r_b: int = 0
    r_u_pct: float = 0.0
    avg_route_len: float | None = None
    discoveries: int = 0
    switches: int = 0
    rediscoveries: int = 0
    relay_reestablishments: int = 0


@dataclass
class MetricsReport:
    scenario: str
    scheme: str
    n_uavs: int
    speed_mps: float
    data_rate_bps: float
    failure_pct: float
    seed: int
    flows: list[FlowReport] = field(default_factory=list)
    c_v_pct: float = 0.0          # full horizon (t = 0 .. end)
    c_v_window_pct: float = 0.0   # measurement window only
    fairness: float = 0.0
    fairness_all_zero: bool = False
    v_f: float = 0.0
    hello_bits: int = 0
    series: list[tuple[float, str, float]] = field(default_factory=list)
    config_echo: dict = field(default_factory=dict)

    @property
    def pdr(self) -> float | None:
        return aggregate_pdr(f.pdr for f in self.flows)

    @property
    def r_b(self) -> float:
        if not self.flows:
            return 0.0
        return sum(f.r_b for f in self.flows) / len(self.flows)

    @property
    def r_u_pct(self) -> float:
        if not self.flows:
            return 0.0
        return sum(f.r_u_pct for f in self.flows) / len(self.flows)

    @property
    def avg_route_len(self) -> float | None:
        vals = [f.avg_route_len for f in self.flows if f.avg_route_len is not None]
        if not vals:
            return None
        return sum(vals) / len(vals)


METRICS_COLUMNS = [
    "scenario", "scheme", "n_uavs", "speed_mps", "data_rate_bps", "failure_pct",
    "seed", "n_flows", "pdr", "r_b", "r_u_pct", "avg_route_len", "c_v_pct",
    "c_v_window_pct", "fairness", "fairness_all_zero", "v_f", "generated",
    "delivered", "expired", "dropped_break", "inflight_end", "discoveries",
    "switches", "rediscoveries", "relay_reestablishments", "hello_bits",
]

EVENT_COLUMNS = ["t", "flow", "event", "route", "hc", "il", "rlt_s", "en_r"]
SERIES_COLUMNS = ["scenario", "scheme", "n_uavs", "speed_mps", "data_rate_bps",
                  "failure_pct", "seed", "t", "metric", "value"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def report_row(r: MetricsReport) -> list[str]:
    agg = {
        "scenario": r.scenario, "scheme": r.scheme, "n_uavs": r.n_uavs,
        "speed_mps": r.speed_mps, "data_rate_bps": r.data_rate_bps,
        "failure_pct": r.failure_pct, "seed": r.seed, "n_flows": len(r.flows),
        "pdr": r.pdr, "r_b": r.r_b, "r_u_pct": r.r_u_pct,
        "avg_route_len": r.avg_route_len, "c_v_pct": r.c_v_pct,
        "c_v_window_pct": r.c_v_window_pct, "fairness": r.fairness,
        "fairness_all_zero": r.fairness_all_zero, "v_f": r.v_f,
        "generated": sum(f.generated for f in r.flows),
        "delivered": sum(f.delivered for f in r.flows),
        "expired": sum(f.expired for f in r.flows),
        "dropped_break": sum(f.dropped_break for f in r.flows),
        "inflight_end": sum(f.inflight_end for f in r.flows),
        "discoveries": sum(f.discoveries for f in r.flows),
        "switches": sum(f.switches for f in r.flows),
        "rediscoveries": sum(f.rediscoveries for f in r.flows),
        "relay_reestablishments": sum(f.relay_reestablishments for f in r.flows),
        "hello_bits": r.hello_bits,
    }
    return [_fmt(agg[c]) for c in METRICS_COLUMNS]


def write_metrics_csv(reports: Sequence[MetricsReport], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRICS_COLUMNS)
        for r in reports:
            w.writerow(report_row(r))


def write_series_csv(reports: Sequence[MetricsReport], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_COLUMNS)
        for r in reports:
            head = [r.scenario, r.scheme, r.n_uavs, _fmt(r.speed_mps),
                    _fmt(r.data_rate_bps), _fmt(r.failure_pct), r.seed]
            for t, name, value in r.series:
                w.writerow(head + [_fmt(t), name, _fmt(value)])


def write_events_csv(events: Sequence[tuple], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_COLUMNS)
        for ev in events:
            w.writerow([_fmt(x) for x in ev])


def read_metrics_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return [dict(row) for row in csv.DictReader(fh)]


_MEAN_FIELDS = [
    "pdr", "r_b", "r_u_pct", "avg_route_len", "c_v_pct", "c_v_window_pct",
    "fairness", "v_f", "generated", "delivered", "expired", "dropped_break",
    "inflight_end", "discoveries", "switches", "rediscoveries",
    "relay_reestablishments", "hello_bits",
]


def mean_over_rows(rows: Sequence[dict]) -> dict:
    """Field-wise arithmetic mean of per-run CSV rows (same configuration,
    different seeds)."""
    if not rows:
        raise ValueError("no rows to average")
    out = dict(rows[0])
    out["seed"] = "mean"
    for key in _MEAN_FIELDS:
        vals = [float(r[key]) for r in rows if r.get(key) not in ("", None)]
        out[key] = f"{sum(vals) / len(vals):.10g}" if vals else ""
    return out
