"""Single-run simulation engine.

Fixed-step hybrid time model: kinematics advance at a small dt while all
protocol logic (Hello state, routing, topology control, pheromone update,
data plane) runs on 1 s ticks. One run is strictly single threaded; all
randomness comes from named streams derived from the run seed, so a run is
a pure function of (config, scenario, scheme, seed).

Per tick, every node reads the previous tick's world snapshot (two-phase
update), honoring the decentralized premise: hop counts to the BS spread by
one hop per Hello, pheromone is read only through heard patches, and the
source's pipe view refreshes at the Notify_Source cadence.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig
from .geometry import AreaMap, CellIndex, cell_of
from .metrics import FlowReport, MetricsReport, coverage_and_fairness, pdr
from .mobility import Role, UavState, select_waypoint, step_all
from .pheromone import PheromoneField
from .radio import (NO_ROUTE_HOPS, HelloPacket, NeighborEntry, NodeQueue,
                    adjacency, interfering_links_all, tdma_share_bps)
from .relay import RelayAssignments
from .routing import (REDISCOVER, SWITCH, LinkView, PipeTopology, Route,
                      RouteMetrics, discover_route, enumerate_pipe_routes,
                      form_pipe, maybe_switch, pipe_bfs_dist, route_metrics,
                      select_active_route, select_shortest)
from .rng import seeded_rng
from .scenarios import Scenario, build_failure_plan
from .topology_control import remove_route_masks, tc_step

PIPE_SCHEMES = ("Pipe", "TCPipe")
SERIES_SAMPLE_S = 10.0


@dataclass
class SimClock:
    tick_s: float = 1.0
    dt_s: float = 0.1
    now_s: float = 0.0
    tick: int = 0
    substep: int = 0

    def advance(self) -> None:
        self.tick += 1
        self.substep = 0
        self.now_s = self.tick * self.tick_s


@dataclass
class PendingRoute:
    install_at: int
    route: Route
    metrics: RouteMetrics
    kind: str  # discovered | switched | relay_established | relay_reestablished


class Flow:
    def __init__(self, flow_id: int, source: int, target_pos: tuple[float, float],
                 ttl_s: float):
        self.id = flow_id
        self.source = source
        self.target_pos = target_pos
        self.route: Route | None = None
        self.metrics: RouteMetrics | None = None
        self.pipe: PipeTopology | None = None
        self.pending: PendingRoute | None = None
        self.broken_since: float | None = None
        self.queue = NodeQueue(ttl_s)
        self.gen_residual = 0.0
        self.credit = 0.0
        self.on_station = False
        self.fail_streak = 0
        self.next_attempt = 0
        self.valid_ticks = 0
        self.hc_ticks = 0
        self.established_once = False
        self.report = FlowReport(flow_id)


@dataclass
class RunResult:
    report: MetricsReport
    events: list = field(default_factory=list)
    mask_events: list = field(default_factory=list)
    trace: list = field(default_factory=list)


class SimulationEngine:
    def __init__(
        self,
        cfg: SimConfig,
        scenario: Scenario,
        seed: int | None = None,
        collect_trace: bool = False,
    ):
        self.cfg = scenario.config(cfg)
        self.scenario = scenario
        self.scheme = scenario.scheme
        self.seed = self.cfg.seed if seed is None else int(seed)
        self.collect_trace = collect_trace

        c = self.cfg
        self.area = AreaMap(c.map_width_m, c.map_height_m, c.cell_size_m)
        self.field = PheromoneField(self.area)
        self.clock = SimClock(c.protocol_tick_s, c.kinematics_dt_s)

        n = c.n_uavs
        self.n_uavs = n
        self.bs = n
        self.n_nodes = n + 1

        launch = seeded_rng(self.seed, "launch")
        ang = launch.uniform(0.0, 2 * math.pi, n)
        rad = c.launch_radius_m * np.sqrt(launch.uniform(0.0, 1.0, n))
        bs_pos = np.asarray(scenario.bs_pos)
        self.positions = np.empty((self.n_nodes, 2))
        self.positions[:n, 0] = np.clip(bs_pos[0] + rad * np.cos(ang), 0, c.map_width_m)
        self.positions[:n, 1] = np.clip(bs_pos[1] + rad * np.sin(ang), 0, c.map_height_m)
        self.positions[self.bs] = bs_pos
        self.headings = np.zeros(self.n_nodes)
        self.headings[:n] = launch.uniform(-math.pi, math.pi, n)
        self.energy = np.full(self.n_nodes, c.en_initial)
        self.energy[self.bs] = math.inf
        self.alive = np.ones(self.n_nodes, dtype=bool)
        self.roles = np.full(self.n_nodes, int(Role.SEARCHER), dtype=np.int8)
        self.roles[self.bs] = int(Role.BS)
        self.hops_to_bs = np.full(self.n_nodes, NO_ROUTE_HOPS, dtype=np.int16)
        self.hops_to_bs[self.bs] = 0
        self.waypoints = np.zeros((self.n_nodes, 2), dtype=np.int64)
        self.wp_centers = self.positions.copy()
        self._sync_waypoint_cells()
        self.orbit_centers = np.zeros((self.n_nodes, 2))
        self.orbit_radius = np.full(self.n_nodes, c.orbit_radius_m)

        self.velocities = np.zeros((self.n_nodes, 2))
        self.adj = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        self.il = np.zeros(self.n_nodes, dtype=np.int64)

        self._prev_lost = np.zeros(self.n_nodes, dtype=bool)
        self.flows: dict[int, Flow] = {}
        self.undiscovered = list(range(len(scenario.targets)))
        self.relays = RelayAssignments()
        self.failure_plan: list[tuple[float, int]] = []
        self._failures_rng = seeded_rng(self.seed, "failures")

        self.scan_counts = np.zeros((self.area.n_cols, self.area.n_rows), dtype=np.int64)
        self._scan_warm: np.ndarray | None = None
        self.events: list[tuple] = []
        self.mask_events: list = []
        self.trace: list[tuple] = []
        self.series: list[tuple[float, str, float]] = []
        self.hello_bits = 0

        self.notify_every = max(1, int(round(c.notify_interval_s / c.protocol_tick_s)))
        self.warm_tick = int(round(c.warmup_s / c.protocol_tick_s))
        self.total_ticks = int(round(c.total_s / c.protocol_tick_s))
        self.rate_pps = c.data_rate_bps / c.packet_bits
        self.install_delay = max(1, int(round(c.route_install_delay_s / c.protocol_tick_s)))

    # -- public ---------------------------------------------------------------

    def run(self) -> RunResult:
        for k in range(self.total_ticks):
            self._tick(k)
            self._kinematics()
            self.clock.advance()
        report = self._finalize()
        return RunResult(report, self.events, self.mask_events, self.trace)

    # -- tick pipeline ----------------------------------------------------------

    def _tick(self, k: int) -> None:
        if k == self.warm_tick:
            self._scan_warm = self.scan_counts.copy()
            self._force_assign_targets(k)
            self._build_failure_plan()
        self._apply_failures(float(k))
        self._drain_flight()
        self._refresh_links()
        view = self._view()
        if self.undiscovered:
            self._sense_targets(k)
        self._update_flows(k, view)
        if self.scheme == "TCPipe":
            self._topology_control(k, view)
        self._scan_and_deposit()
        self.field.step(self.cfg.lambda_evap, self.cfg.psi_diff)
        self._decide_waypoints(k, view)
        self._data_plane(k)
        self._account(k)

    def _view(self) -> LinkView:
        return LinkView(self.positions, self.velocities, self.energy, self.alive,
                        self.il, self.adj, self.cfg.tx_range_m, self.bs)

    def _refresh_links(self) -> None:
        c = self.cfg
        self.adj = adjacency(self.positions, self.alive, c.tx_range_m)
        movers = self.alive.copy()
        movers[self.bs] = False
        self.velocities[:, 0] = np.where(movers, c.speed_mps * np.cos(self.headings), 0.0)
        self.velocities[:, 1] = np.where(movers, c.speed_mps * np.sin(self.headings), 0.0)
        # Advertised hop counts to the BS: BFS over the current link graph
        # (the converged fixed point of the per-Hello distance-vector spread;
        # iterating the DV one hop per tick suffers count-to-infinity during
        # detachments and lets the swarm drift away on stale adverts).
        hops = np.full(self.n_nodes, NO_ROUTE_HOPS, dtype=np.int16)
        hops[self.bs] = 0
        frontier = np.zeros(self.n_nodes, dtype=bool)
        frontier[self.bs] = True
        seen = frontier.copy()
        for depth in range(1, NO_ROUTE_HOPS):
            frontier = self.adj[frontier].any(axis=0) & ~seen
            if not frontier.any():
                break
            hops[frontier] = depth
            seen |= frontier
        hops[~self.alive] = NO_ROUTE_HOPS
        hops[self.bs] = 0
        self.hops_to_bs = hops
        links = []
        for flow in self._flows_sorted():
            if flow.route is not None:
                links.extend(flow.route.links)
        self.il = interfering_links_all(self.positions, links, c.tx_range_m)

    # -- failures and energy -----------------------------------------------------

    def _build_failure_plan(self) -> None:
        if self.scenario.failure_pct <= 0:
            return
        eligible = [
            i for i in range(self.n_uavs)
            if self.alive[i] and self.roles[i] != int(Role.TARGET_UAV)
        ]
        self.failure_plan = build_failure_plan(
            eligible, self.n_uavs, self.scenario.failure_pct, self._failures_rng,
            self.cfg.warmup_s, self.cfg.total_s,
        )

    def _apply_failures(self, now: float) -> None:
        while self.failure_plan and self.failure_plan[0][0] <= now:
            _, node = self.failure_plan.pop(0)
            self._kill(node, now)

    def _drain_flight(self) -> None:
        drain = self.cfg.drain_per_second * self.cfg.protocol_tick_s
        uavs = self.alive[: self.n_uavs]
        self.energy[: self.n_uavs][uavs] -= drain
        for n in np.nonzero(uavs & (self.energy[: self.n_uavs] <= 0))[0].tolist():
            self._kill(n, self.clock.now_s)

    def _kill(self, node: int, now: float) -> None:
        if not self.alive[node]:
            return
        self.alive[node] = False
        if node in self.field.masks:
            self.mask_events.extend(remove_route_masks([node], self.field, now))

    # -- targets -------------------------------------------------------------

    def _sense_targets(self, k: int) -> None:
        for ti in list(self.undiscovered):
            tc = cell_of(self.scenario.targets[ti], self.area)
            best = None
            for i in range(self.n_uavs):
                if not self.alive[i] or self.roles[i] != int(Role.SEARCHER):
                    continue
                if cell_of((self.positions[i, 0], self.positions[i, 1]), self.area) == tc:
                    best = i
                    break  # ids ascend, first hit is lowest
            if best is not None:
                self._assign_target(ti, best, k)

    def _force_assign_targets(self, k: int) -> None:
        for ti in list(self.undiscovered):
            tx, ty = self.scenario.targets[ti]
            best, best_key = None, None
            for i in range(self.n_uavs):
                if not self.alive[i] or self.roles[i] != int(Role.SEARCHER):
                    continue
                d2 = (self.positions[i, 0] - tx) ** 2 + (self.positions[i, 1] - ty) ** 2
                key = (d2, i)
                if best_key is None or key < best_key:
                    best, best_key = i, key
            if best is None:
                continue
            # The monitor must still fly to its target; it cannot source
            # target data before arriving on station.
            self._assign_target(ti, best, k, on_station=False)

    def _assign_target(self, ti: int, uav: int, k: int, on_station: bool = True) -> None:
        self.undiscovered.remove(ti)
        self.roles[uav] = int(Role.TARGET_UAV)
        self.orbit_centers[uav] = self.scenario.targets[ti]
        flow = Flow(ti, uav, self.scenario.targets[ti], self.cfg.ttl_s)
        flow.on_station = on_station
        self.flows[ti] = flow

    def _flows_sorted(self) -> list[Flow]:
        return [self.flows[ti] for ti in sorted(self.flows)]

    # -- routing ------------------------------------------------------------------

    def _route_usable(self, route: Route) -> bool:
        nodes = route.nodes
        for n in nodes:
            if not self.alive[n]:
                return False
        if self.scheme == "Relay":
            # Relays orbit their assigned cells precisely to hold the
            # established links, so validity is judged on orbit centers (the
            # source and BS on their live positions) with slack for orbital
            # wander about those centers.
            slack = 2.0 * self.cfg.orbit_radius_m
            limit = (self.cfg.tx_range_m + slack) ** 2
            pts = [
                self.relays.orbit_center.get(n, (self.positions[n, 0], self.positions[n, 1]))
                if i > 0 else (self.positions[n, 0], self.positions[n, 1])
                for i, n in enumerate(nodes)
            ]
            for (ax, ay), (bx, by) in zip(pts[:-1], pts[1:]):
                if (ax - bx) ** 2 + (ay - by) ** 2 > limit:
                    return False
            return True
        adj = self.adj
        for u, v in zip(nodes[:-1], nodes[1:]):
            if not adj[u, v]:
                return False
        return True

    def _update_flows(self, k: int, view: LinkView) -> None:
        detect = self.cfg.break_detection_delay_s
        reach = self.cfg.orbit_radius_m + self.cfg.cell_size_m
        for flow in self._flows_sorted():
            if not flow.on_station:
                dx = self.positions[flow.source, 0] - flow.target_pos[0]
                dy = self.positions[flow.source, 1] - flow.target_pos[1]
                if dx * dx + dy * dy <= reach * reach:
                    flow.on_station = True
            if flow.pending is not None and k >= flow.pending.install_at:
                pend, flow.pending = flow.pending, None
                if self._route_usable(pend.route):
                    self._install(flow, pend.route, pend.metrics, k, pend.kind, view)
            if flow.route is not None:
                if self._route_usable(flow.route):
                    flow.broken_since = None  # link flap healed unnoticed
                else:
                    # The routing layer learns of a physical break only after
                    # the Hello-expiry detection delay; packets pushed into
                    # the dead route meanwhile are lost.
                    if flow.broken_since is None:
                        flow.broken_since = float(k)
                    if k >= flow.broken_since + detect:
                        self._on_break(flow, k, view)
                        flow.broken_since = None
            if flow.route is None and flow.pending is None and k >= flow.next_attempt:
                self._attempt_discovery(flow, k, view)
            elif (
                flow.route is not None
                and flow.broken_since is None
                and self.scheme in PIPE_SCHEMES
                and flow.pending is None
            ):
                notify_tick = k % self.notify_every == 0
                if notify_tick:
                    self._proactive(flow, k, view)
                else:
                    # Between Notify updates the source still sees its own
                    # route dying (per-Hello link state along the active
                    # route); react without waiting for the next pipe view.
                    m = route_metrics(flow.route.nodes, view)
                    if m.rlt_s <= self.cfg.ttl_s or m.en_r <= self.cfg.en_threshold:
                        self._proactive(flow, k, view)

    def _install(self, flow: Flow, route: Route, metrics: RouteMetrics, k: int,
                 kind: str, view: LinkView) -> None:
        if self.scheme == "TCPipe" and flow.route is not None:
            self.mask_events.extend(
                remove_route_masks(flow.route.nodes, self.field, float(k)))
        flow.route = route
        flow.metrics = metrics
        flow.fail_streak = 0
        if self.scheme in PIPE_SCHEMES:
            flow.pipe = form_pipe(route.nodes, view, float(k))
        if self.scheme == "Relay":
            new_relays = self.relays.assign(flow.id, route, self.positions, self.area)
            for n in new_relays:
                self.roles[n] = int(Role.RELAY)
                self.orbit_centers[n] = self.relays.orbit_center[n]
        in_window = k >= self.warm_tick
        fr = flow.report
        if kind == "discovered":
            fr.discoveries += 1
        elif kind == "switched":
            fr.switches += 1
        elif kind == "relay_reestablished" and in_window:
            fr.relay_reestablishments += 1
        flow.established_once = True
        self._log(k, flow.id, kind, route.nodes, metrics)

    def _on_break(self, flow: Flow, k: int, view: LinkView) -> None:
        old = flow.route
        fr = flow.report
        if k >= self.warm_tick and self.scheme != "Relay":
            fr.r_b += 1  # Relay reports zero breaks by definition
        self._log(k, flow.id, "break", old.nodes, None)
        if self.scheme == "TCPipe":
            self.mask_events.extend(remove_route_masks(old.nodes, self.field, float(k)))
        if self.scheme == "Relay":
            freed = self.relays.release(flow.id)
            for n in freed:
                if self.alive[n]:
                    self.roles[n] = int(Role.SEARCHER)
                    self._reset_waypoint(n)
        flow.route = None
        flow.metrics = None
        flow.credit = 0.0
        flow.next_attempt = k
        if self.scheme in PIPE_SCHEMES:
            self._pipe_recover(flow, old, k, view)

    def _pipe_recover(self, flow: Flow, old: Route, k: int, view: LinkView) -> None:
        """After a break, switch onto the freshest pipe knowledge before
        falling back to a flood. The pipe alternate is already cached at the
        source, so the switch takes effect immediately; only a flood pays a
        discovery round trip."""
        c = self.cfg
        seeds = [n for n in old.nodes if self.alive[n]]
        if not seeds:
            return
        pipe = form_pipe(seeds, view, float(k))
        dist = pipe_bfs_dist(pipe, flow.source, self.bs)
        best = None
        if dist is not None:
            cands = enumerate_pipe_routes(
                pipe, flow.source, self.bs, dist + c.hc_slack,
                c.pipe_max_expansions, c.pipe_max_candidates)
            best = select_active_route(
                cands, c.ttl_s, c.en_threshold, c.en_tolerance,
                c.w1, c.w2, c.alpha_il, c.hc_slack)
        if best is not None:
            route, metrics = best
            self._install(flow, Route(route.nodes, float(k)), metrics, k, "switched", view)
        else:
            if k >= self.warm_tick:
                flow.report.rediscoveries += 1
            self._log(k, flow.id, "rediscover", (), None)

    def _attempt_discovery(self, flow: Flow, k: int, view: LinkView) -> None:
        c = self.cfg
        aodv = self.scheme in ("AODV", "Relay")
        mode = "aodv" if aodv else "pipe"
        cands = discover_route(flow.source, view, mode, c.ttl_s, c.en_threshold,
                               c.directional_slack_m, now=float(k))
        if aodv:
            best = select_shortest(cands)
        else:
            best = select_active_route(cands, c.ttl_s, c.en_threshold, c.en_tolerance,
                                       c.w1, c.w2, c.alpha_il, c.hc_slack)
        if best is None:
            flow.fail_streak += 1
            retry = 1 if flow.fail_streak <= c.discovery_retries else int(c.discovery_backoff_s)
            flow.next_attempt = k + retry
            return
        route, metrics = best
        if self.scheme == "Relay":
            kind = "relay_reestablished" if flow.established_once else "relay_established"
        else:
            kind = "discovered"
        flow.pending = PendingRoute(k + self.install_delay,
                                    Route(route.nodes, float(k)), metrics, kind)

    def _proactive(self, flow: Flow, k: int, view: LinkView) -> None:
        c = self.cfg
        current = route_metrics(flow.route.nodes, view)
        flow.metrics = current
        pipe = form_pipe(flow.route.nodes, view, float(k))
        flow.pipe = pipe
        action, route, metrics = maybe_switch(
            flow.source, self.bs, pipe, flow.route, current,
            c.ttl_s, c.en_threshold, c.en_tolerance, c.w1, c.w2, c.alpha_il,
            c.hc_slack, c.pipe_max_expansions, c.pipe_max_candidates)
        if action == SWITCH:
            self._install(flow, Route(route.nodes, float(k)), metrics, k, "switched", view)
        elif action == REDISCOVER:
            if k >= self.warm_tick:
                flow.report.rediscoveries += 1
            self._log(k, flow.id, "rediscover", (), None)
            cands = discover_route(flow.source, view, "pipe", c.ttl_s, c.en_threshold,
                                   c.directional_slack_m, now=float(k))
            best = select_active_route(cands, c.ttl_s, c.en_threshold, c.en_tolerance,
                                       c.w1, c.w2, c.alpha_il, c.hc_slack)
            if best is not None and best[0].nodes != flow.route.nodes:
                flow.pending = PendingRoute(k + self.install_delay,
                                            Route(best[0].nodes, float(k)),
                                            best[1], "discovered")

    def _topology_control(self, k: int, view: LinkView) -> None:
        c = self.cfg
        for flow in self._flows_sorted():
            if flow.route is not None:
                self.mask_events.extend(
                    tc_step(flow.route.nodes, view, self.field, self.headings,
                            c.th_degree, c.tx_range_m, float(k)))

    # -- coverage and mobility ------------------------------------------------

    def _scan_and_deposit(self) -> None:
        roles = self.roles[: self.n_uavs]
        scanning = self.alive[: self.n_uavs] & (
            (roles == int(Role.SEARCHER)) | (roles == int(Role.TARGET_UAV)))
        if not scanning.any():
            return
        c = self.area.cell_size_m
        xs = self.positions[: self.n_uavs, 0][scanning]
        ys = self.positions[: self.n_uavs, 1][scanning]
        cols = np.clip(np.ceil(xs / c - 1e-9).astype(np.int64) - 1, 0, self.area.n_cols - 1)
        rows = np.clip(np.ceil(ys / c - 1e-9).astype(np.int64) - 1, 0, self.area.n_rows - 1)
        np.add.at(self.scan_counts, (cols, rows), 1)
        self.field.deposit_many(cols, rows, self.cfg.deposit_magnitude)

    def _reset_waypoint(self, n: int) -> None:
        cell = cell_of((self.positions[n, 0], self.positions[n, 1]), self.area)
        self.waypoints[n] = cell
        self.wp_centers[n] = self.area.cell_center(cell)

    def _sync_waypoint_cells(self) -> None:
        for n in range(self.n_nodes):
            self._reset_waypoint(n)

    def _decide_waypoints(self, k: int, view: LinkView) -> None:
        c = self.cfg
        roles = self.roles[: self.n_uavs]
        searchers = self.alive[: self.n_uavs] & (roles == int(Role.SEARCHER))
        d = self.positions[: self.n_uavs] - self.wp_centers[: self.n_uavs]
        arrived = searchers & (d[:, 0] ** 2 + d[:, 1] ** 2 <= c.cell_size_m ** 2)
        # Also re-decide when BS connectivity flips: finishing a long stale
        # leg while lost (or while freshly reconnected) wastes tens of
        # seconds flying on outdated support assumptions.
        hops = self.hops_to_bs[: self.n_uavs]
        flipped = searchers & ((hops == NO_ROUTE_HOPS) != (self._prev_lost[: self.n_uavs]))
        self._prev_lost = self.hops_to_bs == NO_ROUTE_HOPS
        arrived |= flipped
        for i in np.nonzero(arrived)[0].tolist():
            entries = self._neighbor_entries(i, k)
            uav = UavState(
                i, (float(self.positions[i, 0]), float(self.positions[i, 1])),
                float(self.headings[i]), c.speed_mps,
                CellIndex(int(self.waypoints[i, 0]), int(self.waypoints[i, 1])),
                float(self.energy[i]))
            cell = select_waypoint(
                uav, self.field, entries, c.beta, c.tx_range_m, self.area,
                ranges_m=c.candidate_ranges_m, bearings_deg=c.candidate_bearings_deg,
                degree_cap=c.degree_cap, crowding_penalty=c.crowding_penalty,
                patch_limited=c.pheromone_patch_limited, turn_cost=c.turn_cost,
                leg_stable_support=c.leg_stable_support)
            if cell is None:
                # Isolated or route-less neighborhood: recover toward the BS
                # (its GPS position is known) until reconnected.
                cell = self._recovery_cell(i)
            self.waypoints[i] = cell
            self.wp_centers[i] = self.area.cell_center(cell)

    def _recovery_cell(self, i: int) -> CellIndex:
        bx, by = self.scenario.bs_pos
        dx = bx - self.positions[i, 0]
        dy = by - self.positions[i, 1]
        d = math.hypot(dx, dy)
        step = max(self.cfg.candidate_ranges_m)
        if d <= step:
            return cell_of(self.scenario.bs_pos, self.area)
        return cell_of((self.positions[i, 0] + dx / d * step,
                        self.positions[i, 1] + dy / d * step), self.area)

    def _neighbor_entries(self, i: int, k: int) -> list[NeighborEntry]:
        out = []
        for j in np.nonzero(self.adj[i])[0].tolist():
            out.append(NeighborEntry(
                id=j,
                pos=(float(self.positions[j, 0]), float(self.positions[j, 1])),
                velocity=(float(self.velocities[j, 0]), float(self.velocities[j, 1])),
                next_waypoint=(int(self.waypoints[j, 0]), int(self.waypoints[j, 1])),
                hops_to_bs=int(self.hops_to_bs[j]),
                en=float(self.energy[j]) if j != self.bs else 0.0,
                il=int(self.il[j]),
                llt_s=0.0,
                last_heard=float(k),
            ))
        return out

    def _kinematics(self) -> None:
        c = self.cfg
        roles = self.roles
        moving = self.alive.copy()
        moving[self.bs] = False
        orbiting = moving & ((roles == int(Role.TARGET_UAV)) | (roles == int(Role.RELAY)))
        targets = np.where(orbiting[:, None], self.orbit_centers, self.wp_centers)
        step_all(self.positions, self.headings, moving, orbiting, targets,
                 self.orbit_radius, c.speed_mps, c.kinematics_dt_s,
                 c.max_turn_rate_dps, self.area, substeps=c.substeps_per_tick)
        if self.collect_trace:
            t = self.clock.now_s
            for i in range(self.n_nodes):
                if self.alive[i]:
                    self.trace.append((t, i, float(self.positions[i, 0]),
                                       float(self.positions[i, 1]), int(self.roles[i])))

    # -- data plane -------------------------------------------------------------

    def _data_plane(self, k: int) -> None:
        c = self.cfg
        warm = self.warm_tick
        flows = self._flows_sorted()
        for flow in flows:
            fr = flow.report
            if flow.on_station and self.alive[flow.source]:
                flow.gen_residual += self.rate_pps * c.protocol_tick_s
                n = int(flow.gen_residual)
                if n:
                    flow.gen_residual -= n
                    flow.queue.enqueue(n, float(k))
                    if k >= warm:
                        fr.generated += n
            expired = flow.queue.drop_expired_detail(float(k))
            self._count_expired(flow, expired, k)

        active = [f for f in flows if f.route is not None and len(f.queue) > 0]
        if not active:
            return
        through: dict[int, int] = {}
        for f in active:
            for u in f.route.nodes[:-1]:
                through[u] = through.get(u, 0) + 1
        tx_nodes = sorted(through)
        pos = self.positions
        r2 = c.tx_range_m ** 2
        share: dict[int, float] = {}
        for u in tx_nodes:
            contenders = 0
            ux, uy = pos[u, 0], pos[u, 1]
            for v in tx_nodes:
                if v != u and (pos[v, 0] - ux) ** 2 + (pos[v, 1] - uy) ** 2 <= r2:
                    contenders += 1
            share[u] = tdma_share_bps(c.channel_rate_bps, contenders)

        bits = c.packet_bits
        for f in active:
            path = f.route.nodes[:-1]
            rates = [share[u] / through[u] for u in path]
            cap_pps = min(rates) / bits
            e2e = sum(bits / r for r in rates) + c.processing_delay_s * len(path)
            f.credit += cap_pps * c.protocol_tick_s
            budget = int(f.credit)
            if budget <= 0:
                continue
            delivered, expired = f.queue.serve_detail(float(k), budget, e2e)
            nd = sum(n for _, n in delivered)
            f.credit -= nd
            if len(f.queue) == 0:
                f.credit = 0.0
            if nd and len(f.route.nodes) > 2:
                drain = nd * c.drain_per_packet
                for u in f.route.nodes[1:-1]:
                    self.energy[u] -= drain
            if k >= warm:
                n_window = sum(n for t0, n in delivered if t0 >= warm)
                if f.broken_since is None:
                    f.report.delivered += n_window
                else:
                    f.report.dropped_break += n_window  # black-holed in-flight
            self._count_expired(f, expired, k)

    def _count_expired(self, flow: Flow, cohorts: list[tuple[float, int]], k: int) -> None:
        if not cohorts:
            return
        if k >= self.warm_tick:
            n = sum(cnt for t0, cnt in cohorts if t0 >= self.warm_tick)
            if n:
                flow.report.expired += n
                self._log(k, flow.id, "expired", (), None)

    # -- accounting ----------------------------------------------------------------

    def _account(self, k: int) -> None:
        alive_uavs = self.alive[: self.n_uavs]
        active_nodes = set()
        for f in self._flows_sorted():
            if f.route is not None:
                active_nodes.update(f.route.nodes)
        fixed = HelloPacket.FIXED_PREFIX_BITS + HelloPacket.EN_IL_BITS
        bits = int(alive_uavs.sum() + 1) * fixed
        if active_nodes:
            act = np.zeros(self.n_nodes, dtype=bool)
            act[list(active_nodes)] = True
            adjacent = self.adj[:, act].any(axis=1) & self.alive
            deg = self.adj.sum(axis=1)
            for i in np.nonzero(adjacent)[0].tolist():
                bits += 6 + HelloPacket.SUMMARY_BITS * int(deg[i])
        self.hello_bits += bits

        if k >= self.warm_tick:
            for f in self._flows_sorted():
                if f.route is not None and f.broken_since is None:
                    f.valid_ticks += 1
                    f.hc_ticks += f.route.hc
        if k % int(SERIES_SAMPLE_S) == 0:
            cov = 100.0 * float((self.scan_counts >= 1).mean())
            self.series.append((float(k), "coverage_pct", cov))
            if k >= self.warm_tick:
                gen = sum(f.report.generated for f in self._flows_sorted())
                if gen:
                    dlv = sum(f.report.delivered for f in self._flows_sorted())
                    self.series.append((float(k), "pdr", dlv / gen))

    def _log(self, k: int, flow_id: int, kind: str, nodes: tuple,
             metrics: RouteMetrics | None) -> None:
        route_str = "|".join(str(n) for n in nodes)
        if metrics is None:
            self.events.append((float(k), flow_id, kind, route_str, len(nodes) - 1 if nodes else 0,
                                0, 0.0, 0.0))
        else:
            self.events.append((float(k), flow_id, kind, route_str, metrics.hc,
                                metrics.il, metrics.rlt_s, metrics.en_r))

    def _finalize(self) -> MetricsReport:
        window_ticks = self.total_ticks - self.warm_tick
        warm = float(self.warm_tick)
        for f in self._flows_sorted():
            fr = f.report
            fr.inflight_end = f.queue.counts_since(warm)
            fr.pdr = pdr(fr.delivered, fr.generated)
            fr.r_u_pct = 100.0 * f.valid_ticks / window_ticks
            fr.avg_route_len = (f.hc_ticks / f.valid_ticks) if f.valid_ticks else None
            if self.scheme == "Relay":
                fr.r_b = 0
        window_counts = self.scan_counts - (
            self._scan_warm if self._scan_warm is not None else 0)
        c_v_window, fairness, v_f, zero = coverage_and_fairness(window_counts)
        c_v_full = 100.0 * float((self.scan_counts >= 1).mean())
        cfg_echo = {k: (list(v) if isinstance(v, tuple) else v)
                    for k, v in dataclasses.asdict(self.cfg).items()}
        return MetricsReport(
            scenario=self.scenario.name,
            scheme=self.scheme,
            n_uavs=self.cfg.n_uavs,
            speed_mps=self.cfg.speed_mps,
            data_rate_bps=self.cfg.data_rate_bps,
            failure_pct=self.scenario.failure_pct,
            seed=self.seed,
            flows=[f.report for f in self._flows_sorted()],
            c_v_pct=c_v_full,
            c_v_window_pct=c_v_window,
            fairness=fairness,
            fairness_all_zero=zero,
            v_f=v_f,
            hello_bits=self.hello_bits,
            series=self.series,
            config_echo=cfg_echo,
        )


def run_single(cfg: SimConfig, scenario: Scenario, seed: int,
               collect_trace: bool = False) -> RunResult:
    eng = SimulationEngine(cfg.replace(seed=seed), scenario, seed=seed,
                           collect_trace=collect_trace)
    return eng.run()
