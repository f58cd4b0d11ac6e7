"""Per-tick pheromone-mask control by active-route nodes.

Every protocol tick, each non-BS node on an active route counts its 1-hop
neighbors excluding its upstream and downstream route nodes. At or below
the degree threshold the node masks a 2L x L rectangle (long side
perpendicular to the local route axis) to pull nearby UAVs into the thin
pipe section; above it the mask is retracted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pheromone import PheromoneField
from .routing import LinkView

# Masks are re-rasterized only when the owner moved to another cell or the
# route axis rotated by more than this; orientation jitter below it is noise.
_AXIS_COS_TOL = math.cos(math.radians(10.0))


@dataclass
class MaskEvent:
    t: float
    owner: int
    center: tuple[int, int]
    axis: tuple[float, float]
    action: str  # applied | removed


def _route_axis(idx: int, route: Sequence[int], view: LinkView, headings: np.ndarray):
    """Axis for the mask of route[idx]: upstream->downstream direction, with
    the source end using the direction toward its downstream's successor.
    Falls back to the node's own heading when degenerate (flagged)."""
    n = route[idx]
    if idx == 0:
        ref = route[2] if len(route) >= 3 else route[1]
        vec = view.positions[ref] - view.positions[n]
    else:
        vec = view.positions[route[idx + 1]] - view.positions[route[idx - 1]]
    norm = math.hypot(float(vec[0]), float(vec[1]))
    if norm < 1e-9:
        h = float(headings[n])
        return (math.cos(h), math.sin(h)), True
    return (float(vec[0]) / norm, float(vec[1]) / norm), False


def tc_step(
    route: Sequence[int],
    view: LinkView,
    field: PheromoneField,
    headings: np.ndarray,
    th_degree: int,
    l_m: float,
    now: float,
) -> list[MaskEvent]:
    """Apply/retract masks for every route node except the BS; returns the
    transition events (geometry refreshes are silent)."""
    events: list[MaskEvent] = []
    on_route = np.zeros(view.adj.shape[0], dtype=bool)
    on_route[list(route)] = True
    for idx in range(len(route) - 1):  # BS (last node) excluded
        n = route[idx]
        # Degree counts potential alternate-route providers, so fellow route
        # members (not just the immediate upstream/downstream) are excluded.
        degree = int((view.adj[n] & ~on_route).sum())
        if degree <= th_degree:
            axis, degenerate = _route_axis(idx, route, view, headings)
            existing = field.masks.get(n)
            if existing is not None and not degenerate:
                same_cell = existing.center == _cell_of_node(n, view, field)
                same_axis = abs(existing.axis[0] * axis[0] + existing.axis[1] * axis[1]) >= _AXIS_COS_TOL
                if same_cell and same_axis:
                    continue
            pos = (float(view.positions[n, 0]), float(view.positions[n, 1]))
            field.apply_mask(n, pos, axis, l_m, now)
            if existing is None:
                events.append(MaskEvent(now, n, tuple(field.masks[n].center), axis, "applied"))
        else:
            if n in field.masks:
                rect = field.masks[n]
                events.append(MaskEvent(now, n, tuple(rect.center), rect.axis, "removed"))
                field.remove_mask(n)
    return events


def _cell_of_node(n: int, view: LinkView, field: PheromoneField):
    from .geometry import cell_of

    return cell_of((float(view.positions[n, 0]), float(view.positions[n, 1])), field.area)


def remove_route_masks(route: Sequence[int], field: PheromoneField, now: float) -> list[MaskEvent]:
    """Retract every mask owned by the given route's nodes (route abandoned,
    broken, or switched away)."""
    events = []
    for n in route:
        rect = field.masks.get(n)
        if rect is not None:
            events.append(MaskEvent(now, n, tuple(rect.center), rect.axis, "removed"))
            field.remove_mask(n)
    return events
