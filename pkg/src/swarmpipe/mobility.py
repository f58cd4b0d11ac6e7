"""Pheromone- and connectivity-aware waypoint selection plus fixed-wing
kinematics: constant speed, bounded turn rate, boundary reflection, and
circular orbits for target-monitoring and relay nodes.

Waypoint choice trades low repel pheromone against node degree at a set of
candidate cells ahead of the UAV, constrained to candidates predicted to
keep a route to the BS. Pheromone is read only from cells covered by the
UAV's own 5x5 patch or one heard from a current neighbor; unknown cells
read as zero (unexplored means not repelling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .geometry import AreaMap, CellIndex, cell_of
from .pheromone import PheromoneField
from .radio import NO_ROUTE_HOPS, PATCH_HALF, NeighborEntry

TWO_PI = 2.0 * math.pi


class Role(IntEnum):
    SEARCHER = 0
    TARGET_UAV = 1
    RELAY = 2
    BS = 3


@dataclass
class UavState:
    id: int
    pos: tuple[float, float]
    heading: float
    speed: float
    waypoint: CellIndex
    energy: float
    role: Role = Role.SEARCHER
    alive: bool = True


@dataclass
class WaypointCandidate:
    cell: CellIndex
    score: float
    predicted_degree: int
    bs_connected: bool


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % TWO_PI - math.pi


def candidate_cells(
    pos: tuple[float, float],
    heading: float,
    ranges_m: tuple[float, ...],
    bearings_deg: tuple[float, ...],
    area: AreaMap,
) -> list[tuple[CellIndex, float]]:
    """Candidate waypoint cells ahead of the UAV with their relative
    bearings, clipped to the map."""
    out = []
    for r in ranges_m:
        for b in bearings_deg:
            ang = heading + math.radians(b)
            x = pos[0] + r * math.cos(ang)
            y = pos[1] + r * math.sin(ang)
            if area.contains(x, y):
                out.append((cell_of((x, y), area), b))
    return out


def _patch_union(centers: list[CellIndex], area: AreaMap) -> np.ndarray:
    known = np.zeros((area.n_cols, area.n_rows), dtype=bool)
    for pc in centers:
        known[max(0, pc.col - PATCH_HALF): pc.col + PATCH_HALF + 1,
              max(0, pc.row - PATCH_HALF): pc.row + PATCH_HALF + 1] = True
    return known


def score_candidates(
    uav: UavState,
    field: PheromoneField,
    neighbors: list[NeighborEntry],
    beta: float,
    tx_range_m: float,
    area: AreaMap,
    ranges_m: tuple[float, ...] = (300.0, 500.0),
    bearings_deg: tuple[float, ...] = (-90.0, -45.0, 0.0, 45.0, 90.0),
    degree_cap: int = 4,
    crowding_penalty: float = 0.5,
    patch_limited: bool = True,
    turn_cost: float = 0.0,
    leg_stable_support: bool = True,
) -> list[WaypointCandidate]:
    cells = candidate_cells(uav.pos, uav.heading, ranges_m, bearings_deg, area)
    if not cells:
        return []

    # Per-cell pheromone reads are softly saturated (v -> v/(1+v)) so the
    # patch term stays commensurate with the degree term; raw deposits
    # accumulate to ~1/lambda and would otherwise drown it. The transform is
    # strictly monotone, so score ties stay measure-zero and the
    # lexicographic tie-break cannot introduce a systematic drift. With
    # patch-limited reads, cells outside the UAV's own and its neighbors'
    # 5x5 patches are unknown and read as zero.
    eff = field.effective_grid()
    eff = eff / (1.0 + eff)
    if patch_limited:
        own = cell_of(uav.pos, area)
        known = _patch_union([own] + [cell_of(n.pos, area) for n in neighbors], area)
        eff = np.where(known, eff, 0.0)

    half = area.cell_size_m / 2.0
    if neighbors:
        wp = np.asarray([n.next_waypoint for n in neighbors], dtype=float)
        wp = wp * area.cell_size_m + half
        cur = np.asarray([n.pos for n in neighbors], dtype=float)
        has_route = np.asarray([n.hops_to_bs < NO_ROUTE_HOPS for n in neighbors])
    r2 = tx_range_m * tx_range_m

    out = []
    for cell, bearing in cells:
        c0, c1 = max(0, cell.col - 1), cell.col + 2
        rr0, rr1 = max(0, cell.row - 1), cell.row + 2
        pher = float(eff[c0:c1, rr0:rr1].sum())
        degree = 0
        connected = False
        if neighbors:
            cx = cell.col * area.cell_size_m + half
            cy = cell.row * area.cell_size_m + half
            near = (wp[:, 0] - cx) ** 2 + (wp[:, 1] - cy) ** 2 <= r2
            degree = int(near.sum())
            # BS connectivity requires a routed neighbor that covers the
            # candidate from its current position as well as from its own
            # next waypoint, so the support holds across the whole leg.
            if leg_stable_support:
                near_now = (cur[:, 0] - cx) ** 2 + (cur[:, 1] - cy) ** 2 <= r2
                connected = bool((near & near_now & has_route).any())
            else:
                connected = bool((near & has_route).any())
        # Degree is rewarded up to the cap and mildly penalized beyond it:
        # wanting degree near the cap spreads the swarm toward a map-spanning
        # lattice, while reward-only degree collapses it into a wandering
        # ball that cannot hold long routes.
        # Mild preference for straight flight: ballistic legs sweep fresh
        # ground far better than diffusive wandering under local-only
        # pheromone knowledge.
        score = (pher
                 - beta * (min(degree, degree_cap)
                           - crowding_penalty * max(degree - degree_cap, 0))
                 + turn_cost * abs(bearing) / 90.0)
        out.append(WaypointCandidate(cell, score, degree, connected))
    return out


def select_waypoint(
    uav: UavState,
    field: PheromoneField,
    neighbors: list[NeighborEntry],
    beta: float,
    tx_range_m: float,
    area: AreaMap,
    **kwargs,
) -> CellIndex | None:
    """Best next-waypoint cell, or None to hold the current waypoint.

    Constraint precedes optimization: the argmin is taken over candidates
    predicted to keep BS connectivity; with no qualifying candidate the UAV
    falls back toward the nearest neighbor advertising a BS route.
    """
    if not neighbors:
        return None
    cands = score_candidates(uav, field, neighbors, beta, tx_range_m, area, **kwargs)
    qualified = [c for c in cands if c.bs_connected]
    if qualified:
        best = min(qualified, key=lambda c: (c.score, c.cell.col, c.cell.row))
        return best.cell
    routed = [n for n in neighbors if n.hops_to_bs < NO_ROUTE_HOPS]
    if not routed:
        return None
    nearest = min(
        routed,
        key=lambda n: ((n.pos[0] - uav.pos[0]) ** 2 + (n.pos[1] - uav.pos[1]) ** 2, n.id),
    )
    return cell_of(nearest.pos, area)


# ---------------------------------------------------------------------------
# Kinematics
# ---------------------------------------------------------------------------

def step_kinematics(
    pos: tuple[float, float],
    heading: float,
    speed: float,
    waypoint_center: tuple[float, float],
    dt: float,
    max_turn_rate_dps: float,
    area: AreaMap,
) -> tuple[tuple[float, float], float]:
    """One dt of flight toward the waypoint; reflects inward at map edges."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    desired = math.atan2(waypoint_center[1] - pos[1], waypoint_center[0] - pos[0])
    max_turn = math.radians(max_turn_rate_dps) * dt
    diff = _wrap_angle(desired - heading)
    heading = _wrap_angle(heading + max(-max_turn, min(max_turn, diff)))
    x = pos[0] + speed * dt * math.cos(heading)
    y = pos[1] + speed * dt * math.sin(heading)
    x, y, heading = _reflect(x, y, heading, area)
    return (x, y), heading


def _reflect(x: float, y: float, heading: float, area: AreaMap):
    if x < 0.0:
        x, heading = -x, _wrap_angle(math.pi - heading)
    elif x > area.width_m:
        x, heading = 2 * area.width_m - x, _wrap_angle(math.pi - heading)
    if y < 0.0:
        y, heading = -y, _wrap_angle(-heading)
    elif y > area.height_m:
        y, heading = 2 * area.height_m - y, _wrap_angle(-heading)
    return min(max(x, 0.0), area.width_m), min(max(y, 0.0), area.height_m), heading


def orbit_step(
    pos: tuple[float, float],
    heading: float,
    speed: float,
    center: tuple[float, float],
    radius_m: float,
    dt: float,
    max_turn_rate_dps: float,
    area: AreaMap,
) -> tuple[tuple[float, float], float]:
    """Fly a counter-clockwise circle about `center`; approach it first when
    still far away."""
    dx, dy = pos[0] - center[0], pos[1] - center[1]
    dist = math.hypot(dx, dy)
    if dist > radius_m + 2.0 * speed * dt:
        return step_kinematics(pos, heading, speed, center, dt, max_turn_rate_dps, area)
    phi = math.atan2(dy, dx) + (speed / radius_m) * dt
    x = center[0] + radius_m * math.cos(phi)
    y = center[1] + radius_m * math.sin(phi)
    heading = _wrap_angle(phi + math.pi / 2.0)
    x, y, heading = _reflect(x, y, heading, area)
    return (x, y), heading


def step_all(
    positions: np.ndarray,
    headings: np.ndarray,
    moving: np.ndarray,
    orbiting: np.ndarray,
    targets: np.ndarray,
    orbit_radius: np.ndarray,
    speed: float,
    dt: float,
    max_turn_rate_dps: float,
    area: AreaMap,
    substeps: int = 1,
) -> None:
    """Vectorized kinematics for the whole swarm, updating arrays in place.

    `targets` holds the waypoint center for steering nodes and the orbit
    center for orbiting nodes; nodes with `moving` False stay put (BS, dead).
    Runs `substeps` consecutive dt steps, matching the scalar
    step_kinematics/orbit_step semantics.
    """
    max_turn = math.radians(max_turn_rate_dps) * dt
    sdt = speed * dt
    capture = 2.0 * speed * dt
    orbit_idx = np.nonzero(orbiting)[0]
    x = positions[:, 0]
    y = positions[:, 1]
    tx = targets[:, 0]
    ty = targets[:, 1]

    for _ in range(substeps):
        desired = np.arctan2(ty - y, tx - x)
        diff = (desired - headings + math.pi) % TWO_PI - math.pi
        np.clip(diff, -max_turn, max_turn, out=diff)
        h2 = (headings + diff + math.pi) % TWO_PI - math.pi
        nx = x + sdt * np.cos(h2)
        ny = y + sdt * np.sin(h2)

        snap = None
        if orbit_idx.size:
            dx = x[orbit_idx] - tx[orbit_idx]
            dy = y[orbit_idx] - ty[orbit_idx]
            r = orbit_radius[orbit_idx]
            near = dx * dx + dy * dy <= (r + capture) ** 2
            if near.any():
                snap = orbit_idx[near]
                rs = r[near]
                phi = np.arctan2(dy[near], dx[near]) + (speed / rs) * dt
                nx[snap] = tx[snap] + rs * np.cos(phi)
                ny[snap] = ty[snap] + rs * np.sin(phi)
                h2[snap] = (phi + math.pi / 2.0 + math.pi) % TWO_PI - math.pi

        nx, ny, h2 = _reflect_arrays(nx, ny, h2, area)
        np.copyto(x, nx, where=moving)
        np.copyto(y, ny, where=moving)
        np.copyto(headings, h2, where=moving)


def _reflect_arrays(x, y, h, area: AreaMap):
    low = x < 0.0
    high = x > area.width_m
    if low.any() or high.any():
        x = np.where(low, -x, x)
        x = np.where(high, 2 * area.width_m - x, x)
        h = np.where(low | high, (math.pi - h + math.pi) % TWO_PI - math.pi, h)
    low = y < 0.0
    high = y > area.height_m
    if low.any() or high.any():
        y = np.where(low, -y, y)
        y = np.where(high, 2 * area.height_m - y, y)
        h = np.where(low | high, (-h + math.pi) % TWO_PI - math.pi, h)
    return np.clip(x, 0.0, area.width_m), np.clip(y, 0.0, area.height_m), h
