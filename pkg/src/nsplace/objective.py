"""Smooth placement objective: weighted-average wirelength, bin density and
the composite cost combining them with net separation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .design import effective_dims, pin_positions


@dataclass(frozen=True)
class ObjectiveConfig:
    c: float
    lambda_d: float = 1.0
    lambda_ns: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("smoothing parameter c must be positive")
        if self.lambda_d < 0 or self.lambda_ns < 0:
            raise ValueError("objective weights must be nonnegative")

    @classmethod
    def for_design(cls, design, c=None, lambda_d=1.0, lambda_ns=1.0):
        if c is None:
            c = 0.01 * max(design.board.width, design.board.height)
        return cls(c, lambda_d, lambda_ns)


@dataclass(frozen=True)
class DensityGrid:
    """Regular ``nx x ny`` bins tiling the board."""

    nx: int
    ny: int
    bin_w: float
    bin_h: float
    target: float

    @property
    def bins(self):
        return self.nx * self.ny

    def centers(self):
        bx = (np.arange(self.nx) + 0.5) * self.bin_w
        by = (np.arange(self.ny) + 0.5) * self.bin_h
        return bx, by

    @classmethod
    def for_design(cls, design, bin_size=None):
        W, H = design.board.width, design.board.height
        if bin_size is None:
            dims = design.dims()
            bin_size = 2.0 * float(dims.mean()) if len(dims) else max(W, H) / 2.0
        nx = max(1, int(round(W / bin_size)))
        ny = max(1, int(round(H / bin_size)))
        while nx * ny < 4:
            if W / nx >= H / ny:
                nx += 1
            else:
                ny += 1
        total = sum(c.area for c in design.components)
        return cls(nx, ny, W / nx, H / ny, total / (nx * ny))


def wa_wirelength(points, c):
    """Weighted-average wirelength of one net and its per-pin gradient."""
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 2)
    ptr = np.array([0, len(pts)], dtype=np.intp)
    total, _, grad = kernels.get().wa_wirelength(pts, ptr, float(c))
    return float(total), grad


def theta(d, w):
    """Smoothed 1-D overlap between a bin of width ``w`` and a module whose
    center lies ``d`` away from the bin center."""
    d = abs(float(d))
    if d <= w / 2:
        return 1.0 - 2.0 * d * d / (w * w)
    if d <= w:
        return 2.0 * (d - w) ** 2 / (w * w)
    return 0.0


def component_centers(design, placement):
    eff = effective_dims(design, placement.r)
    return placement.x + eff[:, 0] / 2, placement.y + eff[:, 1] / 2


def bin_overlap(grid, bin_index, design, placement, comp):
    """``Theta_x * Theta_y`` for bin ``(ix, iy)`` and component index ``comp``."""
    ix, iy = bin_index
    cx, cy = component_centers(design, placement)
    bx, by = grid.centers()
    return theta(cx[comp] - bx[ix], grid.bin_w) * theta(cy[comp] - by[iy], grid.bin_h)


def normalization(design, placement, grid):
    """Per-component factors ``C_i`` making each module's smoothed overlap sum
    to its area at the current position."""
    cx, cy = component_centers(design, placement)
    bx, by = grid.centers()
    k = kernels.python
    sx = k.theta(cx[:, None] - bx[None, :], grid.bin_w).sum(axis=1)
    sy = k.theta(cy[:, None] - by[None, :], grid.bin_h).sum(axis=1)
    areas = np.array([c.area for c in design.components])
    return areas / np.where(sx * sy > 0, sx * sy, 1.0)


def density_cost(design, placement, grid):
    """Bin density penalty and its gradient w.r.t. each component's (x, y)."""
    cx, cy = component_centers(design, placement)
    areas = np.array([c.area for c in design.components], dtype=float)
    D, _, gx, gy = kernels.get().density(
        np.ascontiguousarray(cx), np.ascontiguousarray(cy), areas,
        grid.nx, grid.ny, grid.bin_w, grid.bin_h, grid.target)
    return float(D), np.column_stack([gx, gy])


def bin_densities(design, placement, grid):
    cx, cy = component_centers(design, placement)
    areas = np.array([c.area for c in design.components], dtype=float)
    return kernels.get().density(np.ascontiguousarray(cx), np.ascontiguousarray(cy), areas,
                                 grid.nx, grid.ny, grid.bin_w, grid.bin_h, grid.target)[1]


def total_wa(design, placement, c):
    pins = pin_positions(design, placement)
    _, _, ptr = design.pin_table()
    return float(kernels.get().wa_wirelength(np.ascontiguousarray(pins), ptr, float(c))[0])


def total_objective(design, placement, cfg, ns=None, grid=None):
    """Composite cost ``sum Wa + lambda_ns * Ns + lambda_d * D``.

    ``ns`` is a callable ``placement -> float`` returning the separation
    residual summed over net pairs; it is not called when ``lambda_ns`` is
    zero.
    """
    grid = DensityGrid.for_design(design) if grid is None else grid
    F = total_wa(design, placement, cfg.c)
    if cfg.lambda_ns and ns is not None:
        F += cfg.lambda_ns * ns(placement)
    if cfg.lambda_d:
        F += cfg.lambda_d * density_cost(design, placement, grid)[0]
    return F
