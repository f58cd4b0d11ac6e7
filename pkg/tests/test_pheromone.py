import random

import numpy as np
import pytest

from swarmpipe.geometry import AreaMap, CellIndex
from swarmpipe.pheromone import PheromoneField


@pytest.fixture
def area():
    return AreaMap(6000.0, 6000.0, 100.0)


@pytest.fixture
def field(area):
    return PheromoneField(area)


class TestDeposit:
    def test_single_deposit(self, field):
        c = CellIndex(5, 7)
        field.deposit(c, 1.0)
        assert field.values[5, 7] == 1.0

    def test_deposits_add(self, field):
        c = CellIndex(5, 7)
        field.deposit(c, 1.0)
        field.deposit(c, 1.0)
        assert field.values[5, 7] == 2.0

    def test_deposit_is_local(self, field):
        field.deposit(CellIndex(5, 7), 1.0)
        v = field.values.copy()
        v[5, 7] = 0.0
        assert not v.any()

    def test_out_of_bounds_rejected(self, field):
        with pytest.raises(ValueError):
            field.deposit(CellIndex(60, 0), 1.0)

    def test_nonpositive_magnitude_rejected(self, field):
        with pytest.raises(ValueError):
            field.deposit(CellIndex(0, 0), 0.0)


class TestStep:
    def test_evaporation_only(self, field):
        field.deposit(CellIndex(10, 10), 1.0)
        field.step(0.006, 0.0)
        assert field.values[10, 10] == pytest.approx(0.994, abs=1e-12)

    def test_identity_when_rates_zero(self, field):
        field.deposit(CellIndex(10, 10), 1.0)
        before = field.values.copy()
        field.step(0.0, 0.0)
        assert (field.values == before).all()

    def test_interior_diffusion_split(self, field):
        field.deposit(CellIndex(10, 10), 1.0)
        field.step(0.0, 0.006)
        assert field.values[10, 10] == pytest.approx(0.994, abs=1e-12)
        for dc, dr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            assert field.values[10 + dc, 10 + dr] == pytest.approx(0.0015, abs=1e-12)
        assert field.total() == pytest.approx(1.0, rel=1e-12)

    def test_corner_cell_splits_between_two_neighbors(self, field):
        field.deposit(CellIndex(0, 0), 1.0)
        field.step(0.0, 0.006)
        assert field.values[0, 0] == pytest.approx(0.994, abs=1e-12)
        assert field.values[1, 0] == pytest.approx(0.003, abs=1e-12)
        assert field.values[0, 1] == pytest.approx(0.003, abs=1e-12)
        assert field.total() == pytest.approx(1.0, rel=1e-12)

    def test_mass_conservation_under_diffusion_only(self, field):
        rng = random.Random(3)
        for _ in range(300):
            field.deposit(CellIndex(rng.randrange(60), rng.randrange(60)),
                          rng.uniform(0.1, 5.0))
        total = field.total()
        for _ in range(25):
            field.step(0.0, 0.006)
            assert field.total() == pytest.approx(total, rel=1e-9)

    def test_mass_shrinks_by_evaporation_factor(self, field):
        rng = random.Random(4)
        for _ in range(100):
            field.deposit(CellIndex(rng.randrange(60), rng.randrange(60)), 1.0)
        total = field.total()
        field.step(0.006, 0.006)
        assert field.total() == pytest.approx(total * 0.994, rel=1e-9)

    def test_non_negativity(self, field):
        rng = random.Random(5)
        for _ in range(200):
            field.deposit(CellIndex(rng.randrange(60), rng.randrange(60)),
                          rng.uniform(0.01, 2.0))
        for _ in range(50):
            field.step(0.2, 0.3)
        assert (field.values >= 0).all()


class TestMasks:
    def test_masked_cell_reads_zero(self, field):
        c = CellIndex(30, 30)
        field.deposit(c, 5.0)
        field.apply_mask(1, (3050.0, 3050.0), (1.0, 0.0), 1000.0)
        assert field.effective_value(c) == 0.0
        assert field.values[30, 30] == 5.0  # raw storage untouched

    def test_unmasked_cell_reads_raw(self, field):
        field.deposit(CellIndex(1, 1), 2.5)
        field.apply_mask(1, (5000.0, 5000.0), (1.0, 0.0), 500.0)
        assert field.effective_value(CellIndex(1, 1)) == 2.5

    def test_long_side_perpendicular_to_route_axis(self, field, area):
        # Route axis east: mask long side 2000 m must run north-south. The
        # rect is centered on a cell center, so both boundary rows/cols land
        # exactly on cell centers and are included: 21 rows x 11 cols.
        rect = field.apply_mask(1, (3050.0, 3050.0), (1.0, 0.0), 1000.0)
        rows = {c.row for c in rect.cells}
        cols = {c.col for c in rect.cells}
        assert len(rows) == 21
        assert len(cols) == 11
        assert len(rows) > len(cols)

    def test_reapply_is_idempotent(self, field):
        field.apply_mask(1, (3050.0, 3050.0), (1.0, 0.0), 1000.0)
        eff1 = field.effective_grid().copy()
        count1 = field._mask_count.copy()
        field.apply_mask(1, (3050.0, 3050.0), (1.0, 0.0), 1000.0)
        assert (field.effective_grid() == eff1).all()
        assert (field._mask_count == count1).all()

    def test_remove_restores_raw_values(self, field):
        rng = random.Random(6)
        for _ in range(50):
            field.deposit(CellIndex(rng.randrange(60), rng.randrange(60)), 1.0)
        raw = field.values.copy()
        field.apply_mask(1, (3000.0, 3000.0), (0.6, 0.8), 1000.0)
        field.remove_mask(1)
        assert (field.effective_grid() == raw).all()

    def test_overlapping_masks_still_zero_and_order_free(self, field):
        c = CellIndex(30, 30)
        field.deposit(c, 7.0)
        field.apply_mask(1, (3050.0, 3050.0), (1.0, 0.0), 1000.0)
        field.apply_mask(2, (3050.0, 3050.0), (0.0, 1.0), 1000.0)
        assert field.effective_value(c) == 0.0
        field.remove_mask(1)
        assert field.effective_value(c) == 0.0
        field.remove_mask(2)
        assert field.effective_value(c) == 7.0

        field.apply_mask(1, (3050.0, 3050.0), (1.0, 0.0), 1000.0)
        field.apply_mask(2, (3050.0, 3050.0), (0.0, 1.0), 1000.0)
        field.remove_mask(2)
        field.remove_mask(1)
        assert field.effective_value(c) == 7.0

    def test_remove_absent_mask_is_noop(self, field):
        field.remove_mask(99)

    def test_one_mask_per_owner(self, field):
        field.apply_mask(1, (1050.0, 1050.0), (1.0, 0.0), 1000.0)
        field.apply_mask(1, (5050.0, 5050.0), (1.0, 0.0), 1000.0)
        assert len(field.masks) == 1
        assert field.effective_value(CellIndex(10, 10)) == field.values[10, 10]

    def test_degenerate_axis_rejected(self, field):
        with pytest.raises(ValueError):
            field.apply_mask(1, (3000.0, 3000.0), (0.0, 0.0), 1000.0)

    def test_mask_cells_match_rect_rasterization(self, field, area):
        from swarmpipe.geometry import cell_of, cells_in_oriented_rect

        pos = (2222.0, 3333.0)
        axis = (0.6, 0.8)
        rect = field.apply_mask(7, pos, axis, 1000.0)
        center = area.cell_center(cell_of(pos, area))
        expect = cells_in_oriented_rect(center, 2000.0, 1000.0, (-0.8, 0.6), area)
        assert set(rect.cells) == expect
