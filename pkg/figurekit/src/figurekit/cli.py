"""Command line front end: one figure file per invocation."""

from __future__ import annotations

import argparse

from .plots import BAR_METRICS, plot_bars, plot_coverage_vs_time, plot_pdr_vs_rate


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="figurekit",
                                 description="render figures from metrics CSVs")
    sub = ap.add_subparsers(dest="command", required=True)

    pdr = sub.add_parser("pdr-vs-rate")
    pdr.add_argument("--csv", required=True)
    pdr.add_argument("--scenario", required=True)
    pdr.add_argument("--uavs", type=int, required=True)
    pdr.add_argument("--failures", type=float, default=0.0)
    pdr.add_argument("--out", required=True)
    pdr.add_argument("--style", default=None)

    cov = sub.add_parser("coverage-vs-time")
    cov.add_argument("--csv", required=True)
    cov.add_argument("--scenario", required=True)
    cov.add_argument("--uavs", type=int, required=True)
    cov.add_argument("--speed", type=float, required=True)
    cov.add_argument("--seed", default=None)
    cov.add_argument("--out", required=True)
    cov.add_argument("--style", default=None)

    bars = sub.add_parser("bars")
    bars.add_argument("--csv", required=True)
    bars.add_argument("--metric", required=True, choices=BAR_METRICS)
    bars.add_argument("--scenarios", default=None)
    bars.add_argument("--uavs", type=int, default=None)
    bars.add_argument("--speed", type=float, default=None)
    bars.add_argument("--rate", type=float, default=None)
    bars.add_argument("--failures", type=float, default=0.0)
    bars.add_argument("--out", required=True)
    bars.add_argument("--style", default=None)

    args = ap.parse_args(argv)
    if args.command == "pdr-vs-rate":
        path = plot_pdr_vs_rate(args.csv, args.scenario, args.uavs, args.out,
                                failure_pct=args.failures, style_path=args.style)
    elif args.command == "coverage-vs-time":
        path = plot_coverage_vs_time(args.csv, args.scenario, args.uavs,
                                     args.speed, args.out, seed=args.seed,
                                     style_path=args.style)
    else:
        scenarios = args.scenarios.split(",") if args.scenarios else None
        path = plot_bars(args.csv, args.metric, args.out, scenarios=scenarios,
                         n_uavs=args.uavs, speed_mps=args.speed,
                         data_rate_bps=args.rate, failure_pct=args.failures,
                         style_path=args.style)
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
