"""Scenario catalog (target layouts C1-C6), node-failure plans, and the
per-run phasing constants.

Single-target layouts C1-C3 and 3-target layouts C4-C6 span the 6x6 km map
from far-from-BS (C1, C4) to close-to-BS (C3, C6); the BS sits at the
bottom center, (3000 m, 200 m).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig

BS_POS = (3000.0, 200.0)

SCHEMES = ("AODV", "Pipe", "TCPipe", "Relay")


@dataclass
class Scenario:
    name: str
    targets: list[tuple[float, float]]
    bs_pos: tuple[float, float] = BS_POS
    scheme: str = "TCPipe"
    failure_pct: float = 0.0
    n_runs: int = 30
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; known: {SCHEMES}")
        if self.failure_pct not in (0, 20, 30):
            raise ValueError("failure_pct must be one of 0, 20, 30")

    def config(self, base: SimConfig | None = None) -> SimConfig:
        cfg = base or SimConfig()
        if self.overrides:
            cfg = cfg.replace(**self.overrides)
        return cfg.validate()


_CATALOG = {
    "C1": [(1500.0, 5000.0)],
    "C2": [(4000.0, 4000.0)],
    "C3": [(2000.0, 2000.0)],
    "C4": [(1000.0, 4500.0), (3000.0, 5000.0), (5000.0, 4500.0)],
    "C5": [(1000.0, 4000.0), (3600.0, 2500.0), (5000.0, 4800.0)],
    "C6": [(1000.0, 1500.0), (3000.0, 2000.0), (5000.0, 1500.0)],
}


def builtin_scenarios() -> dict[str, list[tuple[float, float]]]:
    """Target layouts keyed by scenario name; coordinates in meters."""
    return {k: list(v) for k, v in _CATALOG.items()}


def make_scenario(name: str, scheme: str = "TCPipe", failure_pct: float = 0.0,
                  **overrides) -> Scenario:
    catalog = builtin_scenarios()
    if name not in catalog:
        raise ValueError(f"unknown scenario {name!r}; known: {sorted(catalog)}")
    return Scenario(name, catalog[name], scheme=scheme, failure_pct=failure_pct,
                    overrides=overrides)


def build_failure_plan(
    eligible: list[int],
    n_uavs: int,
    failure_pct: float,
    rng: np.random.Generator,
    t_from: float,
    t_to: float,
) -> list[tuple[float, int]]:
    """(failure time, node) pairs: round(pct * n) victims drawn from the
    eligible ids (BS and target UAVs excluded by the caller), failure times
    uniform over the measurement window. Sorted by time."""
    k = int(round(failure_pct / 100.0 * n_uavs))
    if k == 0:
        return []
    if k > len(eligible):
        k = len(eligible)
    victims = rng.choice(np.asarray(sorted(eligible)), size=k, replace=False)
    times = rng.uniform(t_from, t_to, size=k)
    return sorted(zip(times.tolist(), victims.tolist()))
