"""Repel-pheromone grid: deposit, evaporation, mass-conserving diffusion,
and the zeroing masks used by topology control.

Masks are an overlay: the stored repel values are never touched, so removing
a mask restores the exact pre-mask effective field even after the raw values
evolved underneath it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import AreaMap, CellIndex, cells_in_oriented_rect


@dataclass(frozen=True)
class MaskRect:
    """One owner's zeroing rectangle, recorded with the geometry that built it."""

    center: CellIndex
    cells: frozenset[CellIndex]
    axis: tuple[float, float]
    long_m: float
    short_m: float
    created_at: float


@dataclass
class PheromoneField:
    area: AreaMap
    values: np.ndarray = None  # (n_cols, n_rows) float
    masks: dict[int, MaskRect] = field(default_factory=dict)
    _mask_count: np.ndarray = None  # overlap count per cell

    def __post_init__(self):
        shape = (self.area.n_cols, self.area.n_rows)
        if self.values is None:
            self.values = np.zeros(shape)
        if self._mask_count is None:
            self._mask_count = np.zeros(shape, dtype=np.int32)
        # Edge cells diffuse over fewer neighbors; precompute the divisor.
        self._nbr_count = np.full(shape, 4, dtype=np.int64)
        self._nbr_count[0, :] -= 1
        self._nbr_count[-1, :] -= 1
        self._nbr_count[:, 0] -= 1
        self._nbr_count[:, -1] -= 1

    # -- deposit / dynamics -------------------------------------------------

    def deposit(self, cell: CellIndex, magnitude: float = 1.0) -> None:
        if magnitude <= 0:
            raise ValueError("deposit magnitude must be positive")
        if not (0 <= cell.col < self.area.n_cols and 0 <= cell.row < self.area.n_rows):
            raise ValueError(f"cell {cell} outside grid")
        self.values[cell.col, cell.row] += magnitude

    def deposit_many(self, cols: np.ndarray, rows: np.ndarray, magnitude: float = 1.0) -> None:
        np.add.at(self.values, (cols, rows), magnitude)

    def step(self, lambda_evap: float, psi_diff: float) -> None:
        """One protocol tick: evaporate by (1-lambda), then diffuse psi of each
        cell equally to its existing 4-neighbors (mass conserving)."""
        if not 0 <= lambda_evap < 1 or not 0 <= psi_diff < 1:
            raise ValueError("rates must be in [0, 1)")
        v = self.values
        if lambda_evap:
            v *= 1.0 - lambda_evap
        if psi_diff:
            share = (psi_diff / self._nbr_count) * v
            new = v * (1.0 - psi_diff)
            new[1:, :] += share[:-1, :]
            new[:-1, :] += share[1:, :]
            new[:, 1:] += share[:, :-1]
            new[:, :-1] += share[:, 1:]
            self.values = new

    # -- masks ---------------------------------------------------------------

    def apply_mask(
        self,
        owner: int,
        center_pos: tuple[float, float],
        route_axis: tuple[float, float],
        l_m: float,
        now: float = 0.0,
    ) -> MaskRect:
        """Register owner's 2L x L rectangle: long side 2L perpendicular to the
        route axis, L along it, centered at the owner's cell. Replaces any
        previous mask held by the same owner."""
        ax, ay = float(route_axis[0]), float(route_axis[1])
        norm = math.hypot(ax, ay)
        if norm < 1e-12:
            raise ValueError("degenerate route axis")
        ax, ay = ax / norm, ay / norm
        from .geometry import cell_of

        center_cell = cell_of(center_pos, self.area)
        center = self.area.cell_center(center_cell)
        # Long extent perpendicular to the route axis: rotate +90 degrees.
        cells = cells_in_oriented_rect(center, 2.0 * l_m, l_m, (-ay, ax), self.area)
        rect = MaskRect(center_cell, frozenset(cells), (ax, ay), 2.0 * l_m, l_m, now)
        self.remove_mask(owner)
        self.masks[owner] = rect
        for c in cells:
            self._mask_count[c.col, c.row] += 1
        return rect

    def remove_mask(self, owner: int) -> None:
        rect = self.masks.pop(owner, None)
        if rect is None:
            return
        for c in rect.cells:
            self._mask_count[c.col, c.row] -= 1

    def effective_value(self, cell: CellIndex) -> float:
        """Raw value outside any mask, exactly 0 inside one (P = P_R * A)."""
        if self._mask_count[cell.col, cell.row] > 0:
            return 0.0
        return float(self.values[cell.col, cell.row])

    def effective_grid(self) -> np.ndarray:
        return np.where(self._mask_count > 0, 0.0, self.values)

    def total(self) -> float:
        return float(self.values.sum())
