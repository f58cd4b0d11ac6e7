"""Dedicated-relay baseline: shortest-path discovery, reassignment of the
interior route nodes as orbiting relays, and release/re-establishment when
a relay dies.

A relay orbits its assigned grid cell to hold the established links, so the
route is permanent while its nodes live. Nodes shared by several flows act
as relays for all of them and return to searching only when their last flow
releases them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import AreaMap, cell_of
from .routing import LinkView, Route, RouteMetrics, discover_route, select_shortest


def establish_relay_route(
    source: int, view: LinkView, now: float = 0.0
) -> tuple[Route, RouteMetrics] | None:
    """Shortest-HC route via plain AODV discovery (no gates)."""
    candidates = discover_route(source, view, mode="aodv", ttl_s=0.0, en_threshold=0.0, now=now)
    return select_shortest(candidates)


@dataclass
class RelayAssignments:
    """Which flows each relay node serves, and where it orbits."""

    flows_of: dict[int, set[int]] = field(default_factory=dict)
    orbit_center: dict[int, tuple[float, float]] = field(default_factory=dict)

    def assign(
        self, flow_id: int, route: Route, positions: np.ndarray, area: AreaMap
    ) -> list[int]:
        """Mark the route's interior nodes as relays for this flow; each new
        relay orbits the center of the cell it occupies now. Returns nodes
        newly converted to relays."""
        new = []
        for n in route.nodes[1:-1]:
            serving = self.flows_of.setdefault(n, set())
            if not serving:
                cell = cell_of((float(positions[n, 0]), float(positions[n, 1])), area)
                self.orbit_center[n] = area.cell_center(cell)
                new.append(n)
            serving.add(flow_id)
        return new

    def release(self, flow_id: int) -> list[int]:
        """Release this flow's relays; returns nodes that no longer serve any
        flow (to be returned to searching)."""
        freed = []
        for n, serving in list(self.flows_of.items()):
            serving.discard(flow_id)
            if not serving:
                del self.flows_of[n]
                self.orbit_center.pop(n, None)
                freed.append(n)
        return freed

    def is_relay(self, node: int) -> bool:
        return node in self.flows_of

    def relay_count(self) -> int:
        return len(self.flows_of)
