"""Discrete disks, boundaries and coverage bookkeeping on Z^2.

All set membership is decided by exact integer comparison of squared norms:
z is in D_r iff x*x + y*y <= floor(r^2).  Radii are supplied so that r^2 is
computable exactly (integers, half-integers, or anything whose square is
representable); no floating square roots enter any membership test.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


def disk_threshold(r: float) -> int:
    """Largest integer squared norm inside D_r, i.e. floor(r^2)."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    r = float(r)
    # r is supplied with r^2 exactly representable; guard against the case
    # where r itself is exact but r*r rounds just below an integer.
    rr = r * r
    nearest = round(rr)
    if abs(rr - nearest) < 1e-9 * max(1.0, rr):
        return int(nearest)
    return math.floor(rr)


def disk_points(r: float) -> set[tuple[int, int]]:
    """All lattice points with x^2 + y^2 <= r^2."""
    t = disk_threshold(r)
    m = math.isqrt(t)
    out = set()
    for x in range(-m, m + 1):
        ymax = math.isqrt(t - x * x)
        for y in range(-ymax, ymax + 1):
            out.add((x, y))
    return out


def boundary_points(r: float) -> set[tuple[int, int]]:
    """Points outside D_r with at least one 4-neighbor in D_r."""
    t = disk_threshold(r)
    out = set()
    for x, y in disk_points(r):
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            zx, zy = x + dx, y + dy
            if zx * zx + zy * zy > t:
                out.add((zx, zy))
    return out


def boundary_start(r: float) -> tuple[int, int]:
    """Canonical point of the boundary ring on the positive x-axis."""
    return (math.isqrt(disk_threshold(r)) + 1, 0)


def on_boundary(x: int, y: int, threshold: int) -> bool:
    """Membership in the boundary ring, by exact arithmetic.

    The nearest 4-neighbor to the origin has squared norm
    n2 - 2*max(|x|,|y|) + 1.
    """
    n2 = x * x + y * y
    return n2 > threshold and n2 - 2 * max(abs(x), abs(y)) + 1 <= threshold


class CoverRadius(NamedTuple):
    radius: float
    saturated: bool


class VisitedGrid:
    """Dense occupancy record over D_extent, allocated once per run.

    The backing array has value 0 for unvisited disk points, 1 for visited
    disk points and 2 for cells of the bounding square outside the disk.
    """

    OUTSIDE = 2

    def __init__(self, extent: float):
        self.extent = float(extent)
        self.threshold = disk_threshold(extent)
        self.half = math.isqrt(self.threshold)
        n = 2 * self.half + 1
        xs = np.arange(-self.half, self.half + 1)
        n2 = xs[:, None] ** 2 + xs[None, :] ** 2
        self.occupancy = np.where(n2 <= self.threshold, 0, self.OUTSIDE).astype(np.int8)
        self.norm2 = n2
        self.uncovered_count = int((self.occupancy == 0).sum())

    def _index(self, x: int, y: int) -> tuple[int, int] | None:
        if abs(x) > self.half or abs(y) > self.half:
            return None
        return (x + self.half, y + self.half)

    def mark(self, x: int, y: int) -> None:
        idx = self._index(x, y)
        if idx is None:
            return
        if self.occupancy[idx] == 0:
            self.occupancy[idx] = 1
            self.uncovered_count -= 1

    def is_visited(self, x: int, y: int) -> bool:
        idx = self._index(x, y)
        return idx is not None and self.occupancy[idx] == 1

    def mark_many(self, points) -> None:
        for x, y in points:
            self.mark(x, y)


def cover_radius(grid: VisitedGrid) -> CoverRadius:
    """sup{r : D_r is fully visited} = norm of the nearest unvisited point.

    Saturates at the grid extent when every tracked point is visited.
    """
    unvisited = grid.occupancy == 0
    if not unvisited.any():
        return CoverRadius(grid.extent, True)
    min_n2 = int(grid.norm2[unvisited].min())
    return CoverRadius(math.sqrt(min_n2), False)
