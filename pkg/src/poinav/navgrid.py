"""Traversability segmentation: scene geometry to occupancy grid.

A cell is Free iff its surface normal stays within the slope threshold, it is
not covered by an obstacle footprint, and it lies on a sidewalk polygon. Road
surface is deliberately not traversable: the agent stays on sidewalks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .geometry import points_in_convex
from .scene import HEIGHTFIELD_RESOLUTION, Scene

FREE = 0
OCCUPIED = 1
OFFMAP = 2

DEFAULT_SLOPE_DEG = 20.0
DEFAULT_INFLATION_M = 0.3

# Extra dilation beyond the nominal radius: occupancy is resolved at cell
# centers while the agent disc sweeps continuous positions, so the worst-case
# quantization slack is one cell diagonal.
CELL_DIAG_SLACK = math.sqrt(2.0) * HEIGHTFIELD_RESOLUTION


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    resolution: float
    origin: tuple[float, float]  # world coords of the (0,0) cell's lower-left corner
    cells: np.ndarray  # (ny, nx) uint8 of FREE/OCCUPIED/OFFMAP
    inflation_radius: float

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=np.uint8)
        c.setflags(write=False)
        object.__setattr__(self, "cells", c)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def world_to_cell(self, p) -> tuple[int, int]:
        ix = int(math.floor((p[0] - self.origin[0]) / self.resolution))
        iy = int(math.floor((p[1] - self.origin[1]) / self.resolution))
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def in_bounds(self, ix: int, iy: int) -> bool:
        ny, nx = self.cells.shape
        return 0 <= ix < nx and 0 <= iy < ny

    def is_free(self, ix: int, iy: int) -> bool:
        return self.in_bounds(ix, iy) and self.cells[iy, ix] == FREE

    def is_free_world(self, p) -> bool:
        return self.is_free(*self.world_to_cell(p))

    def inflated(self) -> "OccupancyGrid":
        """Dilate occupied cells by the inflation radius (plus quantization
        slack) so that planning on the result keeps the agent disc clear of
        every occupied cell square. Memoized; grids are immutable."""
        memo = getattr(self, "_inflated_memo", None)
        if memo is not None:
            return memo
        if self.inflation_radius <= 0:
            out = self
        else:
            r_cells = (self.inflation_radius + CELL_DIAG_SLACK) / self.resolution
            span = int(math.floor(r_cells))
            dy, dx = np.mgrid[-span : span + 1, -span : span + 1]
            disc = (dx * dx + dy * dy) <= r_cells * r_cells + 1e-9
            blocked = self.cells != FREE
            dilated = ndimage.binary_dilation(blocked, structure=disc)
            cells = np.where(dilated, np.uint8(OCCUPIED), np.uint8(FREE))
            cells[self.cells == OFFMAP] = OFFMAP
            out = replace(self, cells=cells)
        object.__setattr__(self, "_inflated_memo", out)
        return out

    def free_components(self) -> np.ndarray:
        """8-connected component label per cell (0 on non-free cells)."""
        memo = getattr(self, "_components_memo", None)
        if memo is None:
            memo, _ = ndimage.label(self.cells == FREE, structure=np.ones((3, 3), dtype=bool))
            memo.setflags(write=False)
            object.__setattr__(self, "_components_memo", memo)
        return memo

    def to_pgm(self, path) -> None:
        """Binary PGM dump for eyeballing: 255 = Free, 0 = otherwise."""
        ny, nx = self.cells.shape
        img = np.where(self.cells == FREE, 255, 0).astype(np.uint8)
        with open(path, "wb") as f:
            f.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
            # Top row of the image is the north edge of the scene.
            f.write(img[::-1].tobytes())


def segment_traversable(
    scene: Scene,
    slope_threshold_deg: float = DEFAULT_SLOPE_DEG,
    inflation_radius: float = DEFAULT_INFLATION_M,
) -> OccupancyGrid:
    """Classify every cell of the scene as Free or Occupied.

    The surface normal is taken from central finite differences on the
    heightfield; a cell passes when the normal deviates from vertical by at
    most the threshold.
    """
    if not (0.0 < slope_threshold_deg < 90.0):
        raise ValueError(f"slope threshold must be in (0, 90), got {slope_threshold_deg}")
    res = scene.resolution_m
    h = scene.heights
    ny, nx = h.shape

    gx = np.empty_like(h)
    gy = np.empty_like(h)
    gx[:, 1:-1] = (h[:, 2:] - h[:, :-2]) / (2 * res)
    gx[:, 0] = (h[:, 1] - h[:, 0]) / res if nx > 1 else 0.0
    gx[:, -1] = (h[:, -1] - h[:, -2]) / res if nx > 1 else 0.0
    gy[1:-1, :] = (h[2:, :] - h[:-2, :]) / (2 * res)
    gy[0, :] = (h[1, :] - h[0, :]) / res if ny > 1 else 0.0
    gy[-1, :] = (h[-1, :] - h[-2, :]) / res if ny > 1 else 0.0
    slope = np.degrees(np.arctan(np.hypot(gx, gy)))
    free = slope <= slope_threshold_deg + 1e-9

    xs = (np.arange(nx) + 0.5) * res
    ys = (np.arange(ny) + 0.5) * res
    XS, YS = np.meshgrid(xs, ys)

    on_sidewalk = np.zeros((ny, nx), dtype=bool)
    for poly in scene.sidewalks:
        on_sidewalk |= points_in_convex(XS, YS, poly)
    free &= on_sidewalk

    for ob in scene.obstacles:
        fxs = [v[0] for v in ob.footprint]
        fys = [v[1] for v in ob.footprint]
        i0 = max(0, int((min(fxs)) / res) - 1)
        i1 = min(nx, int(max(fxs) / res) + 2)
        j0 = max(0, int(min(fys) / res) - 1)
        j1 = min(ny, int(max(fys) / res) + 2)
        if i0 >= i1 or j0 >= j1:
            continue
        sub = points_in_convex(XS[j0:j1, i0:i1], YS[j0:j1, i0:i1], ob.footprint)
        free[j0:j1, i0:i1] &= ~sub

    cells = np.where(free, np.uint8(FREE), np.uint8(OCCUPIED))
    return OccupancyGrid(
        resolution=res,
        origin=(0.0, 0.0),
        cells=cells,
        inflation_radius=inflation_radius,
    )
