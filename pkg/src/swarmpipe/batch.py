"""Batch execution: expand a parameter grid into run specs, fan runs out
across worker processes, and merge reports deterministically.

Runs are independent (they share only the immutable base config), so results
are merged by sorting on the spec key regardless of completion order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from .config import SimConfig
from .engine import RunResult, SimulationEngine
from .metrics import MetricsReport
from .scenarios import SCHEMES, make_scenario


@dataclass(frozen=True, order=True)
class RunSpec:
    scenario: str
    scheme: str
    n_uavs: int
    speed_mps: float
    data_rate_bps: float
    failure_pct: float
    seed: int


def expand_grid(
    scenarios: Sequence[str],
    schemes: Sequence[str],
    n_uavs: Sequence[int],
    speeds: Sequence[float],
    rates: Sequence[float],
    failures: Sequence[float],
    seeds: Sequence[int],
) -> list[RunSpec]:
    for s in schemes:
        if s not in SCHEMES:
            raise ValueError(f"unknown scheme {s!r}")
    return [
        RunSpec(sc, sch, n, sp, r, f, seed)
        for sc, sch, n, sp, r, f, seed in product(
            scenarios, schemes, n_uavs, speeds, rates, failures, seeds)
    ]


def execute_spec(spec: RunSpec, base_cfg: SimConfig | None = None) -> RunResult:
    cfg = (base_cfg or SimConfig()).replace(
        n_uavs=spec.n_uavs,
        speed_mps=spec.speed_mps,
        data_rate_bps=spec.data_rate_bps,
        seed=spec.seed,
    )
    scenario = make_scenario(spec.scenario, scheme=spec.scheme,
                             failure_pct=spec.failure_pct)
    return SimulationEngine(cfg, scenario, seed=spec.seed).run()


def _worker(args) -> tuple[RunSpec, MetricsReport]:
    spec, cfg = args
    return spec, execute_spec(spec, cfg).report


def run_batch(
    specs: Iterable[RunSpec],
    base_cfg: SimConfig | None = None,
    workers: int | None = None,
    progress: bool = False,
) -> list[MetricsReport]:
    """Execute all specs and return reports sorted by spec key."""
    specs = sorted(set(specs))
    if workers is None:
        workers = os.cpu_count() or 1
    results: dict[RunSpec, MetricsReport] = {}
    if workers <= 1 or len(specs) <= 1:
        for i, spec in enumerate(specs):
            results[spec] = execute_spec(spec, base_cfg).report
            if progress:
                print(f"[{i + 1}/{len(specs)}] {spec}", flush=True)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            jobs = [(s, base_cfg) for s in specs]
            for i, (spec, report) in enumerate(pool.map(_worker, jobs)):
                results[spec] = report
                if progress:
                    print(f"[{i + 1}/{len(specs)}] {spec}", flush=True)
    return [results[s] for s in specs]
