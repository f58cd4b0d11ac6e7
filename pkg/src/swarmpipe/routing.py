"""Route metrics, gated route discovery, multi-metric route selection, pipe
formation/maintenance, and proactive route switching; also hosts the plain
AODV baseline mode.

A route runs from the target UAV (source) to the BS. Its quality is the
tuple (HC, IL, RLT, En_R): hop count, interfering links summed over route
nodes, minimum link lifetime, and minimum node energy. Selection keeps only
routes that outlive the packet TTL and clear the energy threshold, then
minimizes a cost balancing hop count against interference.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .radio import estimate_llt

LLT_BROKEN = 0.0


@dataclass(frozen=True)
class Route:
    nodes: tuple[int, ...]  # source first, BS last
    established_at: float = 0.0

    def __post_init__(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"route repeats a node: {self.nodes}")
        if len(self.nodes) < 2:
            raise ValueError("route needs at least source and BS")

    @property
    def hc(self) -> int:
        return len(self.nodes) - 1

    @property
    def links(self) -> list[tuple[int, int]]:
        return list(zip(self.nodes[:-1], self.nodes[1:]))


@dataclass(frozen=True)
class RouteMetrics:
    hc: int
    il: int
    rlt_s: float
    en_r: float


@dataclass
class ControlPacket:
    kind: str  # RREQ | RREP | RERR | NotifySource
    originator: int
    destination: int
    seq: int
    path: tuple[int, ...] = ()
    hc: int = 0
    il: int = 0
    min_llt_s: float = math.inf
    min_en: float = math.inf


@dataclass
class LinkView:
    """Snapshot of world state the routing layer is allowed to read."""

    positions: np.ndarray
    velocities: np.ndarray
    energy: np.ndarray
    alive: np.ndarray
    il: np.ndarray
    adj: np.ndarray
    tx_range_m: float
    bs: int

    def neighbors_of(self, node: int) -> np.ndarray:
        return np.nonzero(self.adj[node])[0]

    def llt(self, i: int, j: int) -> float:
        return estimate_llt(
            self.positions[i], self.velocities[i],
            self.positions[j], self.velocities[j], self.tx_range_m,
        )


# ---------------------------------------------------------------------------
# Route metrics
# ---------------------------------------------------------------------------

def route_energy(route: Sequence[int], energy: np.ndarray, alive: np.ndarray) -> float:
    """Minimum residual energy across route nodes; dead node is an error."""
    dead = [n for n in route if not alive[n]]
    if dead:
        raise ValueError(f"route contains dead node(s) {dead}")
    return float(min(energy[n] for n in route))


def route_lifetime(route: Sequence[int], view: LinkView) -> float:
    """Minimum estimated link lifetime across route links; broken link -> 0."""
    rlt = math.inf
    for u, v in zip(route[:-1], route[1:]):
        if not view.adj[u, v]:
            return LLT_BROKEN
        rlt = min(rlt, view.llt(u, v))
    return rlt


def route_metrics(route: Sequence[int], view: LinkView) -> RouteMetrics:
    return RouteMetrics(
        hc=len(route) - 1,
        il=int(sum(view.il[n] for n in route)),
        rlt_s=route_lifetime(route, view),
        en_r=route_energy(route, view.energy, view.alive),
    )


def feasible(m: RouteMetrics, ttl_s: float, en_threshold: float, en_tolerance: float) -> bool:
    """Lifetime and energy admission: RLT > TTL and En_R > En_th + delta_e,
    both strict."""
    return m.rlt_s > ttl_s and m.en_r > en_threshold + en_tolerance


def route_cost(
    m: RouteMetrics,
    hc_min: int,
    il_min: int,
    w1: float = 0.5,
    w2: float = 0.5,
    alpha: float = 0.3,
) -> float:
    """Cost of a feasible route against the feasible set's minima.

    The interference ratio IL_R / (IL_min + alpha*IL_R) is continuous at the
    all-idle corner IL_R = IL_min = 0, where it evaluates to 1/(1+alpha).
    """
    hc_term = m.hc / hc_min
    if m.il == 0 and il_min == 0:
        il_term = 1.0 / (1.0 + alpha)
    else:
        il_term = m.il / (il_min + alpha * m.il)
    return w1 * hc_term + w2 * il_term


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------

def select_active_route(
    candidates: Iterable[tuple[Route, RouteMetrics]],
    ttl_s: float,
    en_threshold: float,
    en_tolerance: float,
    w1: float = 0.5,
    w2: float = 0.5,
    alpha: float = 0.3,
    hc_slack: int = 3,
) -> tuple[Route, RouteMetrics] | None:
    """Feasibility filter, HC filter, then cost argmin with deterministic
    tie-breaking (lower HC, lower IL, lexicographic node ids)."""
    feas = [(r, m) for r, m in candidates if feasible(m, ttl_s, en_threshold, en_tolerance)]
    if not feas:
        return None
    hc_min_all = min(m.hc for _, m in feas)
    feas = [(r, m) for r, m in feas if m.hc <= hc_min_all + hc_slack]
    hc_min = min(m.hc for _, m in feas)
    il_min = min(m.il for _, m in feas)
    return min(
        feas,
        key=lambda rm: (
            route_cost(rm[1], hc_min, il_min, w1, w2, alpha),
            rm[1].hc,
            rm[1].il,
            rm[0].nodes,
        ),
    )


def select_shortest(candidates: Iterable[tuple[Route, RouteMetrics]]):
    """AODV-mode winner: first/shortest RREP, ties by lexicographic path."""
    cands = list(candidates)
    if not cands:
        return None
    return min(cands, key=lambda rm: (rm[1].hc, rm[0].nodes))


# ---------------------------------------------------------------------------
# Discovery (RREQ/RREP flood)
# ---------------------------------------------------------------------------

def discover_route(
    source: int,
    view: LinkView,
    mode: str,
    ttl_s: float,
    en_threshold: float,
    directional_slack_m: float = 200.0,
    now: float = 0.0,
) -> list[tuple[Route, RouteMetrics]]:
    """Flood an RREQ toward the BS and return one candidate route per reverse
    path the BS heard.

    Pipe modes gate forwarding twice: geographically (a node rebroadcasts only
    if it is closer to the BS than the previous hop, within a slack) and on
    link stability/energy (incoming link LLT > TTL, node energy above the
    threshold). In AODV mode every gate is disabled (plain flood). Each node
    forwards a given request at most once; its reverse parent is the first
    forwarder heard (earliest flood layer, lowest id).
    """
    if mode not in ("aodv", "pipe"):
        raise ValueError(f"unknown discovery mode {mode!r}")
    bs = view.bs
    if not view.alive[source]:
        return []
    gated = mode == "pipe"
    bs_pos = view.positions[bs]
    if gated:
        d_bs = np.hypot(view.positions[:, 0] - bs_pos[0], view.positions[:, 1] - bs_pos[1])

    def gate(p: int, u: int) -> bool:
        if not gated:
            return True
        if d_bs[u] >= d_bs[p] + directional_slack_m:
            return False
        return view.llt(p, u) > ttl_s and view.energy[u] > en_threshold

    parent: dict[int, int | None] = {source: None}
    bs_parents: list[int] = []
    layer = [source]
    while layer:
        nxt = []
        for p in sorted(layer):
            for u in view.neighbors_of(p).tolist():
                if u == source:
                    continue
                if u == bs:
                    bs_parents.append(p)
                    continue
                if u in parent:
                    continue
                if gate(p, u):
                    parent[u] = p
                    nxt.append(u)
        layer = nxt

    candidates = []
    seen = set()
    for p in bs_parents:
        if p in seen:
            continue
        seen.add(p)
        path = [bs, p]
        node = p
        while parent[node] is not None:
            node = parent[node]
            path.append(node)
        path.reverse()
        route = Route(tuple(path), established_at=now)
        candidates.append((route, route_metrics(path, view)))
    return candidates


# ---------------------------------------------------------------------------
# Pipe
# ---------------------------------------------------------------------------

@dataclass
class PipeTopology:
    """Active-route nodes plus their <=2-hop neighbors, annotated with the
    link/node state the source learned via Hello and Notify_Source."""

    members: frozenset[int]
    adj: dict[int, tuple[int, ...]]
    llt: dict[tuple[int, int], float]
    en: dict[int, float]
    il: dict[int, int]
    built_at: float = 0.0

    def link_llt(self, u: int, v: int) -> float | None:
        return self.llt.get((u, v) if u < v else (v, u))


def form_pipe(route: Sequence[int], view: LinkView, now: float = 0.0) -> PipeTopology:
    """Membership by breadth-first expansion to depth 2 from the route set."""
    members = set(route)
    frontier = set(route)
    for _ in range(2):
        nxt = set()
        for n in frontier:
            for u in view.neighbors_of(n).tolist():
                if u not in members:
                    nxt.add(u)
        members |= nxt
        frontier = nxt
    ordered = sorted(members)
    adj: dict[int, tuple[int, ...]] = {}
    llt: dict[tuple[int, int], float] = {}
    for n in ordered:
        nbrs = [u for u in view.neighbors_of(n).tolist() if u in members]
        adj[n] = tuple(nbrs)
        for u in nbrs:
            if n < u:
                llt[(n, u)] = view.llt(n, u)
    en = {n: float(view.energy[n]) for n in ordered}
    il = {n: int(view.il[n]) for n in ordered}
    return PipeTopology(frozenset(members), adj, llt, en, il, built_at=now)


def pipe_bfs_dist(pipe: PipeTopology, source: int, bs: int) -> int | None:
    """Hop distance from source to BS inside the pipe, None if unreachable."""
    if source == bs:
        return 0
    dist = {source: 0}
    q = deque([source])
    while q:
        n = q.popleft()
        for u in pipe.adj.get(n, ()):
            if u not in dist:
                dist[u] = dist[n] + 1
                if u == bs:
                    return dist[u]
                q.append(u)
    return None


def pipe_route_metrics(path: Sequence[int], pipe: PipeTopology) -> RouteMetrics | None:
    rlt = math.inf
    for u, v in zip(path[:-1], path[1:]):
        l = pipe.link_llt(u, v)
        if l is None:
            return None
        rlt = min(rlt, l)
    return RouteMetrics(
        hc=len(path) - 1,
        il=int(sum(pipe.il[n] for n in path)),
        rlt_s=rlt,
        en_r=float(min(pipe.en[n] for n in path)),
    )


def _dist_to(pipe: PipeTopology, target: int) -> dict[int, int]:
    dist = {target: 0}
    q = deque([target])
    while q:
        n = q.popleft()
        for u in pipe.adj.get(n, ()):
            if u not in dist:
                dist[u] = dist[n] + 1
                q.append(u)
    return dist


def enumerate_pipe_routes(
    pipe: PipeTopology,
    source: int,
    bs: int,
    hc_cap: int,
    max_expansions: int = 4000,
    max_candidates: int = 600,
) -> list[tuple[Route, RouteMetrics]]:
    """All simple source->BS paths within the pipe up to hc_cap hops,
    enumerated breadth-first over partial paths.

    Partial paths that cannot reach the BS within the remaining hop budget
    are pruned using per-node BFS distances; the prune never drops a valid
    path, so enumeration stays exact until the expansion/candidate budgets
    bound the worst case on large dense pipes (FIFO order keeps the
    truncation deterministic).
    """
    if source not in pipe.members or bs not in pipe.members:
        return []
    dist = _dist_to(pipe, bs)
    if source not in dist or dist[source] > hc_cap:
        return []
    out: list[tuple[Route, RouteMetrics]] = []
    q: deque[tuple[int, ...]] = deque([(source,)])
    expansions = 0
    while q:
        path = q.popleft()
        tail = path[-1]
        hc_here = len(path) - 1
        for u in pipe.adj.get(tail, ()):
            if u in path:
                continue
            if u == bs:
                full = path + (bs,)
                m = pipe_route_metrics(full, pipe)
                if m is not None:
                    out.append((Route(full, established_at=pipe.built_at), m))
                    if len(out) >= max_candidates:
                        return out
                continue
            d = dist.get(u)
            if d is None or hc_here + 1 + d > hc_cap:
                continue
            if expansions < max_expansions:
                expansions += 1
                q.append(path + (u,))
    return out


# ---------------------------------------------------------------------------
# Proactive switching
# ---------------------------------------------------------------------------

KEEP = "keep"
SWITCH = "switch"
REDISCOVER = "rediscover"


def maybe_switch(
    source: int,
    bs: int,
    pipe: PipeTopology,
    current: Route,
    current_metrics: RouteMetrics,
    ttl_s: float,
    en_threshold: float,
    en_tolerance: float,
    w1: float = 0.5,
    w2: float = 0.5,
    alpha: float = 0.3,
    hc_slack: int = 3,
    max_expansions: int = 4000,
    max_candidates: int = 600,
):
    """Decide, at a Notify_Source update, whether to keep the active route,
    switch to a better pipe route, or trigger a new discovery.

    Switching is considered when the current route is about to outlive the
    packet TTL, its residual energy reaches the threshold, or the pipe holds
    a strictly shorter route. Returns (KEEP, ...), (SWITCH, route, metrics)
    or (REDISCOVER, None, None).
    """
    short_dist = pipe_bfs_dist(pipe, source, bs)
    failing = current_metrics.rlt_s <= ttl_s or current_metrics.en_r <= en_threshold
    shorter = short_dist is not None and short_dist <= current_metrics.hc - 1
    if not failing and not shorter:
        return KEEP, current, current_metrics

    hc_cap = (short_dist if short_dist is not None else current_metrics.hc) + hc_slack
    candidates = enumerate_pipe_routes(pipe, source, bs, hc_cap, max_expansions, max_candidates)
    if failing:
        # The active route is dying; re-selecting it (off stale pipe data)
        # is not an escape.
        candidates = [(r, m) for r, m in candidates if r.nodes != current.nodes]
    best = select_active_route(
        candidates, ttl_s, en_threshold, en_tolerance, w1, w2, alpha, hc_slack
    )
    if best is None:
        return REDISCOVER, None, None
    route, metrics = best
    if route.nodes == current.nodes:
        return KEEP, current, current_metrics
    return SWITCH, route, metrics
