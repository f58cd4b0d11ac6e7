"""Command line interface: run one scenario, sweep a batch grid, or
aggregate per-run CSVs into seed-averaged reports."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .batch import expand_grid, run_batch
from .config import SimConfig
from .engine import SimulationEngine
from .metrics import (METRICS_COLUMNS, mean_over_rows, read_metrics_csv,
                      write_events_csv, write_metrics_csv, write_series_csv)
from .scenarios import SCHEMES, builtin_scenarios, make_scenario


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(float(x)) for x in text.split(",") if x.strip()]


def _base_cfg(args) -> SimConfig:
    if getattr(args, "config", None):
        return SimConfig.from_file(args.config)
    return SimConfig()


def cmd_run(args) -> int:
    cfg = _base_cfg(args).replace(
        n_uavs=args.uavs, speed_mps=args.speed, data_rate_bps=args.rate)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for seed in range(args.seed0, args.seed0 + args.seeds):
        scenario = make_scenario(args.scenario, scheme=args.scheme,
                                 failure_pct=args.failures)
        eng = SimulationEngine(cfg.replace(seed=seed), scenario, seed=seed,
                               collect_trace=args.debug_trace)
        result = eng.run()
        reports.append(result.report)
        tag = f"{args.scenario}_{args.scheme}_{seed}"
        write_events_csv(result.events, out / f"events_{tag}.csv")
        if result.mask_events:
            with open(out / f"masks_{tag}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["t", "owner", "center_col", "center_row",
                            "axis_x", "axis_y", "action"])
                for ev in result.mask_events:
                    w.writerow([ev.t, ev.owner, ev.center[0], ev.center[1],
                                f"{ev.axis[0]:.6f}", f"{ev.axis[1]:.6f}", ev.action])
        if args.debug_trace:
            with open(out / f"trace_{tag}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["t", "node", "x", "y", "role"])
                w.writerows(result.trace)
        if args.debug_field:
            grid = eng.field
            with open(out / f"field_{tag}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["col", "row", "value", "effective_value"])
                for col in range(grid.area.n_cols):
                    for row in range(grid.area.n_rows):
                        from .geometry import CellIndex
                        cell = CellIndex(col, row)
                        w.writerow([col, row, f"{grid.values[col, row]:.10g}",
                                    f"{grid.effective_value(cell):.10g}"])
        r = result.report
        print(f"{tag}: pdr={r.pdr if r.pdr is None else round(r.pdr, 4)} "
              f"r_b={r.r_b:.1f} r_u={r.r_u_pct:.1f}% "
              f"len={r.avg_route_len if r.avg_route_len is None else round(r.avg_route_len, 2)} "
              f"c_v={r.c_v_pct:.1f}%")
    write_metrics_csv(reports, out / "metrics.csv")
    write_series_csv(reports, out / "timeseries.csv")
    print(f"wrote {out / 'metrics.csv'}")
    return 0


def cmd_batch(args) -> int:
    schemes = list(SCHEMES) if args.schemes == "all" else args.schemes.split(",")
    specs = expand_grid(
        scenarios=args.scenarios.split(","),
        schemes=schemes,
        n_uavs=_ints(args.uavs),
        speeds=_floats(args.speeds),
        rates=_floats(args.rates),
        failures=_floats(args.failures),
        seeds=list(range(args.seed0, args.seed0 + args.seeds)),
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = run_batch(specs, _base_cfg(args), workers=args.workers,
                        progress=not args.quiet)
    write_metrics_csv(reports, out / "metrics.csv")
    write_series_csv(reports, out / "timeseries.csv")
    print(f"wrote {len(reports)} runs to {out / 'metrics.csv'}")
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in sorted(Path(args.in_dir).glob("metrics*.csv")):
        rows.extend(read_metrics_csv(path))
    if not rows:
        print("no metrics CSVs found", file=sys.stderr)
        return 1
    groups: dict[tuple, list[dict]] = {}
    key_fields = ["scenario", "scheme", "n_uavs", "speed_mps", "data_rate_bps",
                  "failure_pct"]
    for row in rows:
        groups.setdefault(tuple(row[k] for k in key_fields), []).append(row)
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=METRICS_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for key in sorted(groups):
            w.writerow(mean_over_rows(groups[key]))
    print(f"wrote {args.out} ({len(groups)} configurations, {len(rows)} runs)")
    return 0


def cmd_scenarios(_args) -> int:
    for name, targets in builtin_scenarios().items():
        print(f"{name}: {targets}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swarmpipe",
                                description="UAV swarm routing simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario/scheme over seeds")
    run.add_argument("--scenario", default="C1")
    run.add_argument("--scheme", default="TCPipe", choices=SCHEMES)
    run.add_argument("--uavs", type=int, default=50)
    run.add_argument("--speed", type=float, default=20.0)
    run.add_argument("--rate", type=float, default=2e6)
    run.add_argument("--failures", type=float, default=0.0)
    run.add_argument("--seeds", type=int, default=1)
    run.add_argument("--seed0", type=int, default=1)
    run.add_argument("--out-dir", default="out")
    run.add_argument("--config", default=None)
    run.add_argument("--debug-trace", action="store_true")
    run.add_argument("--debug-field", action="store_true")
    run.set_defaults(func=cmd_run)

    batch = sub.add_parser("batch", help="run a parameter grid")
    batch.add_argument("--scenarios", default="C1,C4")
    batch.add_argument("--schemes", default="all")
    batch.add_argument("--uavs", default="30,50")
    batch.add_argument("--speeds", default="20,40")
    batch.add_argument("--rates", default="1e6,2e6,3e6")
    batch.add_argument("--failures", default="0")
    batch.add_argument("--seeds", type=int, default=10)
    batch.add_argument("--seed0", type=int, default=1)
    batch.add_argument("--workers", type=int, default=None)
    batch.add_argument("--out-dir", default="out")
    batch.add_argument("--config", default=None)
    batch.add_argument("--quiet", action="store_true")
    batch.set_defaults(func=cmd_batch)

    rep = sub.add_parser("report", help="average per-run CSVs over seeds")
    rep.add_argument("--in-dir", default="out")
    rep.add_argument("--out", default="report.csv")
    rep.set_defaults(func=cmd_report)

    sc = sub.add_parser("scenarios", help="list built-in target layouts")
    sc.set_defaults(func=cmd_scenarios)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
