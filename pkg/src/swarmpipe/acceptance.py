"""Acceptance campaign runner: the fixed grid of desk-scale runs that the
trend checks in tests/test_acceptance.py evaluate.

The grid covers the single-target far scenario at both densities and speeds,
the close scenario for route-length comparison, the data-rate sweep at low
density, and the 3-target failure sweep. Results are cached as a metrics CSV
so re-running the suite does not repeat finished runs.
"""

from __future__ import annotations

import argparse
import os
import time
from pathlib import Path

from .batch import RunSpec, expand_grid, run_batch
from .config import SimConfig
from .metrics import read_metrics_csv, write_metrics_csv

DEFAULT_SEEDS = 10
RATE = 2e6


def acceptance_specs(seeds: int = DEFAULT_SEEDS) -> list[RunSpec]:
    seed_list = list(range(1, seeds + 1))
    specs: set[RunSpec] = set()
    # Route breaks / route up / coverage at high density, plus both speeds.
    specs |= set(expand_grid(["C1"], ["AODV", "Pipe", "TCPipe", "Relay"], [50],
                             [20.0, 40.0], [RATE], [0.0], seed_list))
    # Short-route scenario for the route-length comparison.
    specs |= set(expand_grid(["C3"], ["TCPipe", "AODV"], [50], [20.0], [RATE],
                             [0.0], seed_list))
    # Low-density data-rate sweep: PDR orderings and monotonicity.
    specs |= set(expand_grid(["C1"], ["AODV", "Pipe", "TCPipe", "Relay"], [30],
                             [20.0, 40.0], [1e6, 2e6, 3e6], [0.0], seed_list))
    # Node-failure sweep on the far 3-target layout.
    specs |= set(expand_grid(["C4"], ["TCPipe", "Pipe", "Relay"], [50], [20.0],
                             [RATE], [0.0, 20.0, 30.0], seed_list))
    return sorted(specs)


def campaign_path(out_dir: str | Path) -> Path:
    return Path(out_dir) / "metrics.csv"


def ensure_campaign(out_dir: str | Path, seeds: int = DEFAULT_SEEDS,
                    workers: int | None = None, progress: bool = True) -> list[dict]:
    """Run any missing campaign runs and return all rows."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = campaign_path(out_dir)
    rows = read_metrics_csv(path) if path.exists() else []
    have = {
        (r["scenario"], r["scheme"], int(r["n_uavs"]), float(r["speed_mps"]),
         float(r["data_rate_bps"]), float(r["failure_pct"]), int(r["seed"]))
        for r in rows
    }
    todo = [
        s for s in acceptance_specs(seeds)
        if (s.scenario, s.scheme, s.n_uavs, s.speed_mps, s.data_rate_bps,
            s.failure_pct, s.seed) not in have
    ]
    if todo:
        t0 = time.time()
        if progress:
            print(f"acceptance campaign: {len(todo)} runs to execute "
                  f"({len(have)} cached)", flush=True)
        reports = run_batch(todo, SimConfig(), workers=workers, progress=progress)
        tmp = out_dir / "metrics_new.csv"
        write_metrics_csv(reports, tmp)
        rows.extend(read_metrics_csv(tmp))
        tmp.unlink()
        _write_rows(rows, path)
        if progress:
            print(f"campaign done in {time.time() - t0:.0f}s -> {path}", flush=True)
    return rows


def _write_rows(rows: list[dict], path: Path) -> None:
    import csv

    from .metrics import METRICS_COLUMNS

    rows = sorted(rows, key=lambda r: (
        r["scenario"], r["scheme"], int(r["n_uavs"]), float(r["speed_mps"]),
        float(r["data_rate_bps"]), float(r["failure_pct"]), int(r["seed"])))
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=METRICS_COLUMNS, extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="run the acceptance campaign")
    ap.add_argument("--out-dir", default="acceptance_out")
    ap.add_argument("--seeds", type=int, default=DEFAULT_SEEDS)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args(argv)
    ensure_campaign(args.out_dir, args.seeds, args.workers)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
