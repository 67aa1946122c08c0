"""Global placement by alternating minimization with momentum.

Each iteration freezes the placement, refreshes the per-pair separators, then
moves every movable component against the average of its pins' gradients
plus the density gradient.  Orientations are held fixed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .design import effective_dims, rotate_offsets
from .objective import DensityGrid
from .separation import SeparatorCache, pair_set

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GpConfig:
    alpha: float = 1e-3
    momentum: float = 0.9
    iterations: int = 5000
    tol: float = 1e-4
    window: int = 20
    refresh: int = 1
    pair_radius: float | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("learning rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.iterations < 0:
            raise ValueError("iteration budget must be nonnegative")
        if self.refresh < 1 or self.window < 1:
            raise ValueError("refresh and window must be at least 1")


def component_update_matrix(pin_grad, pin_comp, n):
    """Row ``i`` is the mean gradient over component ``i``'s pins (zero if pinless)."""
    pin_grad = np.asarray(pin_grad, dtype=float).reshape(-1, 2)
    pin_comp = np.asarray(pin_comp, dtype=np.intp)
    counts = np.bincount(pin_comp, minlength=n).astype(float)
    P = np.column_stack([np.bincount(pin_comp, weights=pin_grad[:, k], minlength=n) for k in (0, 1)])
    P = P.reshape(n, 2).astype(float)  # bincount yields integers when there are no pins
    nz = counts > 0
    P[nz] /= counts[nz, None]
    return P


class GpProblem:
    """Arrays for one design with orientations frozen."""

    def __init__(self, design, objective, r, grid=None, pairs=None, backend=None):
        self.design = design
        self.cfg = objective
        self.kernel = kernels.get(backend)
        self.backend = backend
        self.n = design.n
        self.r = np.asarray(r, dtype=np.int8).copy()
        self.grid = DensityGrid.for_design(design) if grid is None else grid
        comp, offs, ptr = design.pin_table()
        self.pin_comp = comp
        self.net_ptr = np.ascontiguousarray(ptr, dtype=np.intp)
        h = design.dims()[:, 1]
        self.rel = rotate_offsets(offs, h[comp], self.r[comp]) if len(comp) else np.zeros((0, 2))
        self.eff = effective_dims(design, self.r)
        self.areas = np.array([c.area for c in design.components], dtype=float)
        self.movable = design.movable
        W, H = design.board.width, design.board.height
        self.hi = np.column_stack([np.maximum(W - self.eff[:, 0], 0.0),
                                   np.maximum(H - self.eff[:, 1], 0.0)])
        self.pairs = pairs

    def pins(self, pos):
        return np.ascontiguousarray(pos[self.pin_comp] + self.rel)

    def evaluate(self, pos, cache=None, solve=True, want_grad=True):
        """Objective terms at ``pos`` (``(n, 2)`` lower-left corners) and the
        component update direction."""
        cfg = self.cfg
        pins = self.pins(pos)
        wa, _, gpin = self.kernel.wa_wirelength(pins, self.net_ptr, float(cfg.c))
        ns = 0.0
        if cfg.lambda_ns and cache is not None and len(cache):
            if solve:
                cache.solve(pins, self.net_ptr)
            ns = cache.total()
            if want_grad:
                cache.pin_gradient(pins, self.net_ptr, cfg.lambda_ns, gpin)
        dens = 0.0
        gd = np.zeros((self.n, 2))
        if cfg.lambda_d and self.n:
            centers = pos + self.eff / 2
            dens, _, gx, gy = self.kernel.density(
                np.ascontiguousarray(centers[:, 0]), np.ascontiguousarray(centers[:, 1]), self.areas,
                self.grid.nx, self.grid.ny, self.grid.bin_w, self.grid.bin_h, self.grid.target)
            gd = np.column_stack([gx, gy])
        F = float(wa) + cfg.lambda_ns * ns + cfg.lambda_d * dens
        terms = {"F": F, "wa": float(wa), "ns": ns, "d": dens}
        if not want_grad:
            return terms, None
        P = component_update_matrix(gpin, self.pin_comp, self.n)
        return terms, cfg.lambda_d * gd + P


@dataclass
class GpState:
    pos: np.ndarray
    velocity: np.ndarray
    cache: SeparatorCache | None
    best_pos: np.ndarray
    best_F: float = np.inf
    iteration: int = 0
    history: list = field(default_factory=list)

    def placement(self, problem, best=True):
        from .design import Placement
        pos = self.best_pos if best else self.pos
        return Placement(pos[:, 0], pos[:, 1], problem.r)


def init_state(problem, seed, pairs=None):
    pos = np.column_stack([seed.x, seed.y]).astype(float).reshape(-1, 2)
    cache = None
    if problem.cfg.lambda_ns:
        cache = SeparatorCache(pair_set(problem.design) if pairs is None else pairs, problem.backend)
    return GpState(pos.copy(), np.zeros_like(pos), cache, pos.copy())


def gp_step(state, cfg, problem):
    """One alternating-minimization iteration; mutates and returns ``state``."""
    solve = state.iteration % cfg.refresh == 0
    terms, g = problem.evaluate(state.pos, state.cache, solve=solve)
    bad = ~np.isfinite(g).all(axis=1)
    if bad.any():
        cid = problem.design.components[int(np.flatnonzero(bad)[0])].id
        raise FloatingPointError(f"non-finite gradient on component {cid!r}")
    if terms["F"] < state.best_F:
        state.best_F = terms["F"]
        state.best_pos = state.pos.copy()
    state.history.append(terms)
    mov = problem.movable
    v = state.velocity
    v[mov] = cfg.momentum * v[mov] - cfg.alpha * g[mov]
    new = state.pos + v
    clipped = np.clip(new, 0.0, problem.hi)
    v[clipped != new] = 0.0
    new = clipped
    new[~mov] = state.pos[~mov]
    v[~mov] = 0.0
    state.pos = new
    state.iteration += 1
    return state


def _converged(history, cfg):
    if len(history) <= cfg.window:
        return False
    a, b = history[-1 - cfg.window]["F"], history[-1]["F"]
    return abs(b - a) <= cfg.tol * max(abs(a), 1e-12)


def run_global_placement(design, seed, objective, cfg=GpConfig(), grid=None, trace=None,
                         backend=None, state_out=None):
    """Iterate :func:`gp_step` from ``seed``; return the best placement seen.

    ``trace`` may be an open text file receiving ``iter F wa ns d`` rows.
    """
    problem = GpProblem(design, objective, seed.r, grid, backend=backend)
    pairs = None
    if objective.lambda_ns and cfg.pair_radius is not None:
        pairs = pair_set(design, seed, cfg.pair_radius)
    state = init_state(problem, seed, pairs)
    if cfg.iterations == 0:
        return seed.copy()
    for _ in range(cfg.iterations):
        gp_step(state, cfg, problem)
        if trace is not None:
            t = state.history[-1]
            trace.write(f"{state.iteration - 1} {t['F']!r} {t['wa']!r} {t['ns']!r} {t['d']!r}\n")
        if _converged(state.history, cfg):
            break
    # The final iterate has not been scored yet.
    terms, _ = problem.evaluate(state.pos, state.cache, solve=True, want_grad=False)
    if terms["F"] < state.best_F:
        state.best_F = terms["F"]
        state.best_pos = state.pos.copy()
    log.info("global placement: %d iterations, best F %.6g", state.iteration, state.best_F)
    if state_out is not None:
        state_out.append(state)
    return state.placement(problem).with_fixed(design)
