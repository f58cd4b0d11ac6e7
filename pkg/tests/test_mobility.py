import math
import random

import numpy as np
import pytest

from swarmpipe.geometry import AreaMap, CellIndex, cell_of
from swarmpipe.mobility import (Role, UavState, orbit_step, score_candidates,
                                select_waypoint, step_all, step_kinematics)
from swarmpipe.pheromone import PheromoneField
from swarmpipe.radio import NeighborEntry


@pytest.fixture
def area():
    return AreaMap(6000.0, 6000.0, 100.0)


@pytest.fixture
def field(area):
    return PheromoneField(area)


def entry(nid, pos, waypoint=None, hops=2):
    wp = waypoint if waypoint is not None else cell_of(pos, AreaMap())
    return NeighborEntry(nid, pos, (0.0, 0.0), tuple(wp), hops, 80.0, 0, 60.0, 0.0)


def uav(pos=(3000.0, 3000.0), heading=0.0):
    return UavState(0, pos, heading, 20.0, cell_of(pos, AreaMap()), 100.0)


class TestSelectWaypoint:
    def test_no_neighbors_holds(self, field, area):
        assert select_waypoint(uav(), field, [], 1.5, 1000.0, area) is None

    def test_degree_wins_on_equal_pheromone(self, field, area):
        # Field empty: all pheromone zero. One neighbor parks at a spot near
        # the right-hand candidates; they gain predicted degree and win.
        me = uav(heading=0.0)
        anchor = entry(1, (3000.0, 2400.0), waypoint=(30, 24), hops=1)
        friend = entry(2, (3400.0, 2700.0), waypoint=(34, 27), hops=3)
        got = select_waypoint(me, field, [anchor, friend], 1.5, 1000.0, area,
                              crowding_penalty=0.0)
        cands = score_candidates(me, field, [anchor, friend], 1.5, 1000.0, area,
                                 crowding_penalty=0.0)
        got_c = next(c for c in cands if c.cell == got)
        best_deg = max(c.predicted_degree for c in cands if c.bs_connected)
        assert got_c.predicted_degree == best_deg

    def test_masked_region_attracts_with_beta_zero(self, field, area):
        # Cover everything, then zero a rectangle; with beta=0 the argmin
        # must fall inside the masked region (the topology-control mechanism).
        field.values[:, :] = 50.0
        field.apply_mask(9, (3000.0, 3000.0), (0.0, 1.0), 1000.0)
        me = uav(pos=(2400.0, 3000.0), heading=0.0)
        nbr = entry(1, (2500.0, 3000.0), waypoint=(25, 30), hops=1)
        got = select_waypoint(me, field, [nbr], 0.0, 1000.0, area)
        assert got is not None
        assert field._mask_count[got.col, got.row] > 0

    def test_lexicographic_tie_break_two_candidates(self, field, area):
        # Exhaustive 2-candidate check: symmetric geometry gives two equal
        # scores; the lower (col, row) must win.
        me = uav(pos=(3050.0, 3050.0), heading=math.pi / 2)  # facing north
        nbr = entry(1, (3050.0, 3050.0), waypoint=(30, 30), hops=1)
        got = select_waypoint(me, field, [nbr], 1.5, 1000.0, area,
                              ranges_m=(300.0,), bearings_deg=(-90.0, 90.0))
        cands = score_candidates(me, field, [nbr], 1.5, 1000.0, area,
                                 ranges_m=(300.0,), bearings_deg=(-90.0, 90.0))
        assert len(cands) == 2
        assert cands[0].score == cands[1].score
        assert got == min((c.cell for c in cands), key=lambda c: (c.col, c.row))

    def test_constraint_precedes_optimization(self, field, area):
        # A pheromone-free candidate without BS support must lose to a
        # supported one, however good its score.
        field.values[:, :] = 10.0
        me = uav(pos=(3000.0, 3000.0), heading=0.0)
        # Support only around the forward candidates.
        sup = entry(1, (3400.0, 3000.0), waypoint=(34, 30), hops=1)
        # clear pheromone behind (the +/-90 candidates) but leave them
        # unsupported: support waypoint is 34,30 -> around x=3450.
        for col in range(26, 34):
            for row in range(24, 37):
                field.values[col, row] = 0.0
        got = select_waypoint(me, field, [sup], 1.5, 1000.0, area)
        cands = score_candidates(me, field, [sup], 1.5, 1000.0, area)
        chosen = next(c for c in cands if c.cell == got)
        assert chosen.bs_connected

    def test_fallback_toward_routed_neighbor(self, field, area):
        # Neighbors exist and advertise routes, but none can support any
        # candidate: fall back to the nearest routed neighbor's cell.
        me = uav(pos=(3000.0, 3000.0))
        far = entry(1, (3950.0, 3000.0), waypoint=(59, 59), hops=1)
        got = select_waypoint(me, field, [far], 1.5, 1000.0, area,
                              ranges_m=(300.0,), bearings_deg=(180.0,))
        assert got == cell_of((3950.0, 3000.0), area)

    def test_neighbors_without_route_hold(self, field, area):
        me = uav(pos=(3000.0, 3000.0))
        lost = entry(1, (3100.0, 3000.0), hops=15)
        assert select_waypoint(me, field, [lost], 1.5, 1000.0, area) is None


class TestStepKinematics:
    def test_straight_advance(self, area):
        pos, heading = step_kinematics((1000.0, 1000.0), 0.0, 20.0,
                                       (2000.0, 1000.0), 0.1, 30.0, area)
        assert pos[0] == pytest.approx(1002.0, abs=1e-9)
        assert pos[1] == pytest.approx(1000.0, abs=1e-9)
        assert heading == 0.0

    def test_displacement_magnitude(self, area):
        pos, _ = step_kinematics((1000.0, 1000.0), 0.3, 20.0,
                                 (1100.0, 1200.0), 0.1, 3000.0, area)
        d = math.hypot(pos[0] - 1000.0, pos[1] - 1000.0)
        assert d == pytest.approx(2.0, abs=1e-9)

    def test_turn_rate_limited(self, area):
        # Waypoint behind: one 0.1 s step may turn at most 3 degrees.
        _, heading = step_kinematics((1000.0, 1000.0), 0.0, 20.0,
                                     (0.0, 1000.0), 0.1, 30.0, area)
        assert abs(heading) == pytest.approx(math.radians(3.0), abs=1e-9)

    def test_boundary_reflection_keeps_inbounds(self, area):
        pos, heading = step_kinematics((5.0, 3000.0), math.pi, 40.0,
                                       (-500.0, 3000.0), 0.5, 0.0, area)
        assert 0.0 <= pos[0] <= area.width_m
        assert math.cos(heading) > 0  # now pointing back inside

    def test_positions_stay_inbounds_long_run(self, area):
        rng = random.Random(8)
        pos = (rng.uniform(0, 6000), rng.uniform(0, 6000))
        heading = rng.uniform(-math.pi, math.pi)
        wp = (rng.uniform(0, 6000), rng.uniform(0, 6000))
        for _ in range(2000):
            pos, heading = step_kinematics(pos, heading, 40.0, wp, 0.1, 30.0, area)
            assert 0.0 <= pos[0] <= 6000.0 and 0.0 <= pos[1] <= 6000.0


class TestOrbit:
    def test_period(self, area):
        # Full revolution takes 2*pi*r/v seconds.
        center = (3000.0, 3000.0)
        pos = (3100.0, 3000.0)
        heading = math.pi / 2
        period = 2 * math.pi * 100.0 / 20.0
        steps = int(round(period / 0.1))
        p = pos
        for _ in range(steps):
            p, heading = orbit_step(p, heading, 20.0, center, 100.0, 0.1, 30.0, area)
        assert p[0] == pytest.approx(3100.0, abs=2.5)
        assert p[1] == pytest.approx(3000.0, abs=2.5)

    def test_radius_bound(self, area):
        center = (3000.0, 3000.0)
        p, heading = (3100.0, 3000.0), math.pi / 2
        for _ in range(500):
            p, heading = orbit_step(p, heading, 20.0, center, 100.0, 0.1, 30.0, area)
            r = math.hypot(p[0] - center[0], p[1] - center[1])
            assert abs(r - 100.0) <= 20.0 * 0.1 + 1e-6

    def test_approach_from_far(self, area):
        center = (3000.0, 3000.0)
        p, heading = (1000.0, 1000.0), 0.0
        for _ in range(3000):
            p, heading = orbit_step(p, heading, 20.0, center, 100.0, 0.1, 30.0, area)
        assert math.hypot(p[0] - center[0], p[1] - center[1]) <= 105.0


class TestStepAllMatchesScalar:
    def test_vectorized_equals_scalar_for_steerers(self, area):
        rng = random.Random(10)
        n = 12
        positions = np.array([[rng.uniform(100, 5900), rng.uniform(100, 5900)]
                              for _ in range(n)])
        headings = np.array([rng.uniform(-math.pi, math.pi) for _ in range(n)])
        targets = np.array([[rng.uniform(0, 6000), rng.uniform(0, 6000)]
                            for _ in range(n)])
        moving = np.ones(n, dtype=bool)
        orbiting = np.zeros(n, dtype=bool)
        radius = np.full(n, 100.0)

        want_p, want_h = [], []
        for i in range(n):
            p, h = (positions[i, 0], positions[i, 1]), headings[i]
            for _ in range(10):
                p, h = step_kinematics(p, h, 20.0, tuple(targets[i]), 0.1, 30.0, area)
            want_p.append(p)
            want_h.append(h)

        step_all(positions, headings, moving, orbiting, targets, radius,
                 20.0, 0.1, 30.0, area, substeps=10)
        assert positions == pytest.approx(np.array(want_p), abs=1e-9)
        assert headings == pytest.approx(np.array(want_h), abs=1e-9)

    def test_vectorized_equals_scalar_for_orbiters(self, area):
        rng = random.Random(11)
        n = 6
        centers = np.array([[rng.uniform(1000, 5000), rng.uniform(1000, 5000)]
                            for _ in range(n)])
        positions = centers + np.array([[rng.uniform(-400, 400), rng.uniform(-400, 400)]
                                        for _ in range(n)])
        headings = np.array([rng.uniform(-math.pi, math.pi) for _ in range(n)])
        moving = np.ones(n, dtype=bool)
        orbiting = np.ones(n, dtype=bool)
        radius = np.full(n, 100.0)

        want_p, want_h = [], []
        for i in range(n):
            p, h = (positions[i, 0], positions[i, 1]), headings[i]
            for _ in range(10):
                p, h = orbit_step(p, h, 20.0, tuple(centers[i]), 100.0, 0.1, 30.0, area)
            want_p.append(p)
            want_h.append(h)

        step_all(positions, headings, moving, orbiting, centers, radius,
                 20.0, 0.1, 30.0, area, substeps=10)
        assert positions == pytest.approx(np.array(want_p), abs=1e-9)
        assert headings == pytest.approx(np.array(want_h), abs=1e-9)

    def test_stationary_nodes_do_not_move(self, area):
        positions = np.array([[100.0, 100.0], [200.0, 200.0]])
        headings = np.array([0.0, 1.0])
        moving = np.array([False, True])
        orbiting = np.zeros(2, dtype=bool)
        targets = np.array([[5000.0, 5000.0], [5000.0, 5000.0]])
        step_all(positions, headings, moving, orbiting, targets,
                 np.full(2, 100.0), 20.0, 0.1, 30.0, area, substeps=5)
        assert (positions[0] == [100.0, 100.0]).all()
        assert headings[0] == 0.0
        assert (positions[1] != [200.0, 200.0]).any()
