"""swarmpipe: deterministic simulator of a decentralized UAV swarm with
pheromone-driven mobility, pipe routing, topology control, and AODV/relay
baseline schemes."""

from .config import SimConfig
from .engine import RunResult, SimulationEngine, run_single
from .geometry import AreaMap, CellIndex, cell_of, cells_in_oriented_rect
from .metrics import MetricsReport
from .scenarios import Scenario, builtin_scenarios, make_scenario

__version__ = "0.1.0"

__all__ = [
    "AreaMap", "CellIndex", "MetricsReport", "RunResult", "Scenario",
    "SimConfig", "SimulationEngine", "builtin_scenarios", "cell_of",
    "cells_in_oriented_rect", "make_scenario", "run_single", "__version__",
]
