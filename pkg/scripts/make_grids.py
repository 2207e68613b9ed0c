#!/usr/bin/env python
"""Regenerate the shipped occupancy rasters under configs/grids/.

Both arenas are 60 x 60 cells at 1 m resolution. The open arena has no
obstacles; the walled arena carries a single horizontal wall that shadows
the lower-right part of the perimeter route from the source placed at
(45, 40), so logs recorded there mix line-of-sight and blocked segments.
"""

from pathlib import Path

import numpy as np

SIZE = 60


def open_arena() -> np.ndarray:
    return np.zeros((SIZE, SIZE), dtype=int)


def walled_arena() -> np.ndarray:
    grid = np.zeros((SIZE, SIZE), dtype=int)
    # wall cells y in [25, 26), x in [35, 53); the perimeter route stays clear
    grid[25, 35:53] = 1
    return grid


def write(grid: np.ndarray, path: Path) -> None:
    # first text line is the top (max y) row
    lines = ["".join(str(v) for v in row) for row in grid[::-1]]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path} ({grid.sum()} occupied cells)")


def main() -> None:
    out = Path(__file__).resolve().parent.parent / "configs" / "grids"
    out.mkdir(parents=True, exist_ok=True)
    write(open_arena(), out / "open.txt")
    write(walled_arena(), out / "walled.txt")


if __name__ == "__main__":
    main()
