"""Simulation configuration and its flat key-value file format.

Every knob the simulator uses is a field here, so a run is fully described
by (config, scenario, scheme, seed). The file format is `key = value` lines
with `#` comments, one key per field.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


@dataclass
class SimConfig:
    # Area and grid
    map_width_m: float = 6000.0
    map_height_m: float = 6000.0
    cell_size_m: float = 100.0

    # Swarm
    n_uavs: int = 50
    speed_mps: float = 20.0
    launch_radius_m: float = 500.0
    max_turn_rate_dps: float = 30.0
    orbit_radius_m: float = 100.0

    # Radio / traffic
    tx_range_m: float = 1000.0
    channel_rate_bps: float = 11e6
    packet_bytes: int = 1500
    ttl_s: float = 3.0
    data_rate_bps: float = 2e6
    processing_delay_s: float = 0.010
    hello_interval_s: float = 1.0
    neighbor_expiry_intervals: int = 2
    notify_interval_s: float = 2.0
    llt_cap_s: float = 3600.0

    # Timing
    warmup_s: float = 1000.0
    measure_s: float = 2000.0
    kinematics_dt_s: float = 0.1
    protocol_tick_s: float = 1.0

    # Pheromone
    lambda_evap: float = 0.006
    psi_diff: float = 0.006
    deposit_magnitude: float = 1.0

    # Mobility scoring
    beta: float = 1.5
    degree_cap: int = 2
    crowding_penalty: float = 0.5
    pheromone_patch_limited: bool = True
    turn_cost: float = 0.0
    leg_stable_support: bool = True
    candidate_ranges_m: tuple[float, ...] = (300.0, 500.0)
    candidate_bearings_deg: tuple[float, ...] = (-90.0, -45.0, 0.0, 45.0, 90.0)

    # Routing
    w1: float = 0.5
    w2: float = 0.5
    alpha_il: float = 0.3
    hc_slack: int = 3
    directional_slack_m: float = 200.0
    discovery_retries: int = 3
    discovery_backoff_s: float = 1.0
    route_install_delay_s: float = 1.0
    break_detection_delay_s: float = 1.0
    pipe_max_expansions: int = 4000
    pipe_max_candidates: int = 600

    # Topology control
    th_degree: int = 2

    # Energy
    en_initial: float = 100.0
    en_threshold: float = 10.0
    en_tolerance: float = 0.02
    drain_per_second: float = 0.01
    drain_per_packet: float = 5e-5

    # Provenance
    seed: int = 1

    def validate(self) -> "SimConfig":
        if abs(self.w1 + self.w2 - 1.0) > 1e-12:
            raise ValueError(f"w1 + w2 must equal 1, got {self.w1} + {self.w2}")
        for name in (
            "tx_range_m", "channel_rate_bps", "data_rate_bps", "speed_mps",
            "ttl_s", "packet_bytes", "cell_size_m", "kinematics_dt_s",
            "protocol_tick_s",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        ratio = self.protocol_tick_s / self.kinematics_dt_s
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("kinematics dt must divide the protocol tick")
        if not 0 <= self.lambda_evap < 1 or not 0 <= self.psi_diff < 1:
            raise ValueError("evaporation/diffusion rates must be in [0, 1)")
        if self.n_uavs <= 0:
            raise ValueError("n_uavs must be positive")
        return self

    @property
    def total_s(self) -> float:
        return self.warmup_s + self.measure_s

    @property
    def substeps_per_tick(self) -> int:
        return int(round(self.protocol_tick_s / self.kinematics_dt_s))

    @property
    def packet_bits(self) -> int:
        return self.packet_bytes * 8

    def replace(self, **kwargs) -> "SimConfig":
        return dataclasses.replace(self, **kwargs)

    def to_file(self, path: str | Path) -> None:
        lines = ["# swarmpipe simulation config"]
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(f"{x:g}" for x in v)
            lines.append(f"{f.name} = {v}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_file(cls, path: str | Path) -> "SimConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, val = (s.strip() for s in line.partition("="))
            if key not in known:
                raise ValueError(f"line {lineno}: unknown config key {key!r}")
            kwargs[key] = _parse(val, getattr(cls(), key))
        return cls(**kwargs).validate()


def _parse(text: str, default):
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(float(text))
    if isinstance(default, float):
        return float(text)
    if isinstance(default, tuple):
        return tuple(float(x) for x in text.split(",") if x.strip())
    return text
