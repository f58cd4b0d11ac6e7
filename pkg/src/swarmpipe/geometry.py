"""World geometry: the gridded area map and oriented-rectangle cell rasterization.

All positions are metric (x, y) in a flat plane with the origin at the
south-west corner. Cells are square; a cell is addressed by (col, row)
with col indexing x and row indexing y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

# Points exactly on a cell edge belong to the lower-index cell, so the
# north/east map edges are still in-bounds.
_EDGE_TOL = 1e-9


class CellIndex(NamedTuple):
    col: int
    row: int


@dataclass(frozen=True)
class AreaMap:
    """Rectangular mission area divided into square grid cells."""

    width_m: float = 6000.0
    height_m: float = 6000.0
    cell_size_m: float = 100.0

    def __post_init__(self):
        for name in ("width_m", "height_m", "cell_size_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.width_m % self.cell_size_m or self.height_m % self.cell_size_m:
            raise ValueError(
                "map extents must be exact multiples of the cell size: "
                f"{self.width_m} x {self.height_m} / {self.cell_size_m}"
            )

    @property
    def n_cols(self) -> int:
        return int(round(self.width_m / self.cell_size_m))

    @property
    def n_rows(self) -> int:
        return int(round(self.height_m / self.cell_size_m))

    @property
    def n_cells(self) -> int:
        return self.n_cols * self.n_rows

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width_m and 0.0 <= y <= self.height_m

    def cell_center(self, cell: CellIndex) -> tuple[float, float]:
        c = self.cell_size_m
        return (cell.col * c + c / 2.0, cell.row * c + c / 2.0)

    def cell_id(self, cell: CellIndex) -> int:
        """Flat id (row-major) used by compact wire encodings."""
        return cell.row * self.n_cols + cell.col

    def cell_from_id(self, cid: int) -> CellIndex:
        return CellIndex(cid % self.n_cols, cid // self.n_cols)


def _axis_cell(v: float, cell_size: float, n: int, label: str) -> int:
    if v < 0 or v > n * cell_size:
        raise ValueError(f"position {label}={v} outside [0, {n * cell_size}]")
    if v <= 0:
        return 0
    # Edge points (exact multiples of the cell size) go to the lower cell.
    return min(int(math.ceil(v / cell_size - _EDGE_TOL)) - 1, n - 1)


def cell_of(pos: tuple[float, float], area: AreaMap) -> CellIndex:
    """Cell containing a metric position; edge points go to the lower-index cell."""
    x, y = float(pos[0]), float(pos[1])
    return CellIndex(
        _axis_cell(x, area.cell_size_m, area.n_cols, "x"),
        _axis_cell(y, area.cell_size_m, area.n_rows, "y"),
    )


def cells_in_oriented_rect(
    center: tuple[float, float],
    long_m: float,
    short_m: float,
    axis: tuple[float, float],
    area: AreaMap,
) -> set[CellIndex]:
    """Cells whose centers lie inside a rotated rectangle, clipped to the map.

    The rectangle extends long_m along `axis` (a unit vector) and short_m
    perpendicular to it, centered at `center`. Membership is decided by the
    cell center with a 1e-9 m tolerance on both half-plane tests.
    """
    ax, ay = float(axis[0]), float(axis[1])
    norm = math.hypot(ax, ay)
    if norm < 1e-12:
        raise ValueError("axis must be a nonzero vector")
    if abs(norm - 1.0) > 1e-6:
        ax, ay = ax / norm, ay / norm
    if long_m <= 0 or short_m <= 0:
        raise ValueError("rectangle extents must be positive")

    cx, cy = float(center[0]), float(center[1])
    half_l = long_m / 2.0
    half_s = short_m / 2.0
    c = area.cell_size_m
    # Bounding box of the rotated rectangle, in cell indices.
    reach_x = half_l * abs(ax) + half_s * abs(ay)
    reach_y = half_l * abs(ay) + half_s * abs(ax)
    lo_col = max(0, int(math.floor((cx - reach_x) / c)) - 1)
    hi_col = min(area.n_cols - 1, int(math.ceil((cx + reach_x) / c)) + 1)
    lo_row = max(0, int(math.floor((cy - reach_y) / c)) - 1)
    hi_row = min(area.n_rows - 1, int(math.ceil((cy + reach_y) / c)) + 1)
    if lo_col > hi_col or lo_row > hi_row:
        return set()

    cols = np.arange(lo_col, hi_col + 1)
    rows = np.arange(lo_row, hi_row + 1)
    xs = cols * c + c / 2.0 - cx
    ys = rows * c + c / 2.0 - cy
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    along = gx * ax + gy * ay
    across = -gx * ay + gy * ax
    inside = (np.abs(along) <= half_l + _EDGE_TOL) & (np.abs(across) <= half_s + _EDGE_TOL)
    ii, jj = np.nonzero(inside)
    return {CellIndex(int(cols[i]), int(rows[j])) for i, j in zip(ii, jj)}


def cells_to_bool_grid(cells: Iterable[CellIndex], area: AreaMap) -> np.ndarray:
    """(n_cols, n_rows) boolean grid with True at the given cells."""
    grid = np.zeros((area.n_cols, area.n_rows), dtype=bool)
    for cell in cells:
        grid[cell.col, cell.row] = True
    return grid
