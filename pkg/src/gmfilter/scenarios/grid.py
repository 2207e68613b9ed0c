"""Occupancy grid with exact line-of-sight raycasts.

The grid is a boolean raster over a rectangle of square cells. Text
rasters are rows of ``0`` (free) and ``1`` (occupied) characters; the
first text line is the top (largest-y) row of the map. Internally
``occupancy[iy, ix]`` has iy increasing with world y.

Line of sight uses integer cell traversal (the Amanatides-Woo stepping
scheme): the segment is walked cell by cell, so a single occupied cell
anywhere on the segment, endpoints included, blocks it.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from gmfilter.errors import IngestError

__all__ = ["OccupancyGrid", "grid_los", "load_grid"]


class OccupancyGrid:
    __slots__ = ("cell_size", "origin", "occupancy")

    def __init__(self, occupancy: np.ndarray, cell_size: float = 1.0,
                 origin=(0.0, 0.0)):
        occupancy = np.asarray(occupancy, dtype=bool)
        if occupancy.ndim != 2 or occupancy.size == 0:
            raise ValueError(f"occupancy must be a nonempty 2-D raster, got {occupancy.shape}")
        if cell_size <= 0:
            raise ValueError(f"cell_size must be > 0, got {cell_size}")
        self.occupancy = occupancy
        self.cell_size = float(cell_size)
        self.origin = (float(origin[0]), float(origin[1]))

    @property
    def shape(self):
        return self.occupancy.shape

    @property
    def extent(self):
        """(xmin, ymin, xmax, ymax) of the covered rectangle."""
        ny, nx = self.occupancy.shape
        x0, y0 = self.origin
        return (x0, y0, x0 + nx * self.cell_size, y0 + ny * self.cell_size)

    def contains(self, point) -> bool:
        x, y = float(point[0]), float(point[1])
        xmin, ymin, xmax, ymax = self.extent
        return xmin <= x <= xmax and ymin <= y <= ymax

    def cell_index(self, point) -> tuple[int, int]:
        """(ix, iy) of the cell containing `point`; boundary points clamp inward."""
        if not self.contains(point):
            raise ValueError(f"point {tuple(point)} outside grid extent {self.extent}")
        ny, nx = self.occupancy.shape
        ix = int(math.floor((float(point[0]) - self.origin[0]) / self.cell_size))
        iy = int(math.floor((float(point[1]) - self.origin[1]) / self.cell_size))
        return (min(max(ix, 0), nx - 1), min(max(iy, 0), ny - 1))

    def occupied(self, ix: int, iy: int) -> bool:
        return bool(self.occupancy[iy, ix])


def load_grid(path, cell_size: float = 1.0, origin=(0.0, 0.0)) -> OccupancyGrid:
    """Read a 0/1 text raster; the first line is the top row of the map."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
             if ln.strip()]
    if not lines:
        raise IngestError(f"{path}: empty grid raster")
    width = len(lines[0])
    rows = []
    for lineno, ln in enumerate(lines, start=1):
        if len(ln) != width:
            raise IngestError(f"{path}: line {lineno}: ragged row "
                              f"(width {len(ln)}, expected {width})")
        bad = set(ln) - {"0", "1"}
        if bad:
            raise IngestError(f"{path}: line {lineno}: invalid characters {sorted(bad)}")
        rows.append([c == "1" for c in ln])
    # text top row is max-y: flip so occupancy[0] is the bottom row
    occupancy = np.array(rows, dtype=bool)[::-1]
    return OccupancyGrid(occupancy, cell_size=cell_size, origin=origin)


def grid_los(grid: OccupancyGrid, a, b) -> bool:
    """True iff no occupied cell intersects the segment a -> b (endpoints included)."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    ix, iy = grid.cell_index((ax, ay))
    jx, jy = grid.cell_index((bx, by))

    if grid.occupied(ix, iy):
        return False
    dx = bx - ax
    dy = by - ay
    step_x = 1 if dx > 0 else -1
    step_y = 1 if dy > 0 else -1
    cs = grid.cell_size
    ox, oy = grid.origin

    if dx != 0:
        next_vx = ox + (ix + (step_x > 0)) * cs
        t_max_x = (next_vx - ax) / dx
        t_delta_x = cs / abs(dx)
    else:
        t_max_x = math.inf
        t_delta_x = math.inf
    if dy != 0:
        next_vy = oy + (iy + (step_y > 0)) * cs
        t_max_y = (next_vy - ay) / dy
        t_delta_y = cs / abs(dy)
    else:
        t_max_y = math.inf
        t_delta_y = math.inf

    # the walk takes exactly |jx-ix| + |jy-iy| steps; cap it to stay safe
    # against degenerate floating ties at cell corners
    for _ in range(abs(jx - ix) + abs(jy - iy)):
        if (ix, iy) == (jx, jy):
            break
        if t_max_x <= t_max_y:
            ix += step_x
            t_max_x += t_delta_x
        else:
            iy += step_y
            t_max_y += t_delta_y
        if grid.occupied(ix, iy):
            return False
    return True
