"""Legalization as a mixed-integer program.

Variables are component corners ``x, y``, orientation bits ``r``, per-net
bounding-box bounds and the largest and smallest net HPWL.  The objective is
total HPWL plus the HPWL range.  Each pair of components that must not
overlap gets four big-M rows selected by two binaries ``p, q``:

====  ====  ================
 p     q    active relation
====  ====  ================
 0     0    i left of j
 0     1    i under j
 1     0    i right of j
 1     1    i over j
====  ====  ================

Pairs that are already far apart in the global placement keep only the row
matching their current relation, and lose their binaries.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from graphlib import TopologicalSorter

import numpy as np
from scipy.sparse import csr_matrix

from .bnb import (FEASIBLE_TIMEOUT, INFEASIBLE, NO_SOLUTION, OPTIMAL, BnbConfig, LpRelaxation,
                  branch_and_bound)
from .design import LATTICE, Placement, effective_dims, pin_positions, to_lattice
from .geometry import Rect, rect_gap

log = logging.getLogger(__name__)

DIRECTIONS = ("left", "under", "right", "over")
_PQ = {"left": (0, 0), "under": (0, 1), "right": (1, 0), "over": (1, 1)}
_FROM_PQ = {v: k for k, v in _PQ.items()}


class InfeasibleError(RuntimeError):
    pass


class SolveTimeout(RuntimeError):
    pass


@dataclass(frozen=True)
class RelConstraint:
    """Component ``i`` lies ``direction`` of component ``j`` (indices)."""

    i: int
    j: int
    direction: str

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("a relative constraint needs two distinct components")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")

    @property
    def pair(self):
        return (min(self.i, self.j), max(self.i, self.j))


@dataclass
class MilpModel:
    """Sparse linear model.  Row ``k`` reads ``A[k] . v  sense[k]  rhs[k]``
    with sense one of ``L`` (<=), ``G`` (>=), ``E`` (=)."""

    names: list
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray
    obj: np.ndarray
    rows: list
    sense: list
    rhs: list
    row_names: list
    design: object = None
    rels: tuple = ()
    comp_vars: np.ndarray | None = None  # (n, 3) indices of x, y, r
    pair_vars: dict = field(default_factory=dict)  # (i, j) -> (p, q)

    @property
    def num_vars(self):
        return len(self.names)

    @property
    def num_binaries(self):
        return int(np.count_nonzero(self.binary))

    def index(self, name):
        if not hasattr(self, "_name_index"):
            self._name_index = {n: k for k, n in enumerate(self.names)}
        return self._name_index[name]

    def matrix(self):
        data, cols, ptr = [], [], [0]
        for row in self.rows:
            for k, v in row.items():
                cols.append(k)
                data.append(v)
            ptr.append(len(cols))
        return csr_matrix((np.array(data, dtype=float), np.array(cols, dtype=np.intp),
                           np.array(ptr, dtype=np.intp)), shape=(len(self.rows), self.num_vars))

    def objective_value(self, v):
        return float(np.asarray(self.obj) @ np.asarray(v, dtype=float))

    def violation(self, v):
        """Largest constraint or bound violation of the vector ``v``."""
        v = np.asarray(v, dtype=float)
        worst = float(max(np.max(self.lb - v, initial=0.0), np.max(v - self.ub, initial=0.0)))
        lhs = self.matrix() @ v if self.rows else np.zeros(0)
        for s, a, b in zip(self.sense, lhs, self.rhs):
            if s == "L":
                worst = max(worst, a - b)
            elif s == "G":
                worst = max(worst, b - a)
            else:
                worst = max(worst, abs(a - b))
        return worst

    def placement(self, v):
        """Component coordinates of a solution vector."""
        if self.comp_vars is None:
            raise ValueError("model carries no component mapping")
        v = np.asarray(v, dtype=float)
        cv = self.comp_vars
        r = np.rint(v[cv[:, 2]]).astype(np.int8) if len(cv) else np.zeros(0, dtype=np.int8)
        return Placement(v[cv[:, 0]], v[cv[:, 1]], r)


class _Builder:
    def __init__(self):
        self.names, self.lb, self.ub, self.binary, self.obj = [], [], [], [], []
        self.rows, self.sense, self.rhs, self.row_names = [], [], [], []

    def var(self, name, lb, ub, binary=False, obj=0.0):
        self.names.append(name)
        self.lb.append(lb)
        self.ub.append(ub)
        self.binary.append(binary)
        self.obj.append(obj)
        return len(self.names) - 1

    def row(self, name, terms, sense, rhs):
        row = {}
        for k, c in terms:
            if c != 0.0:
                row[k] = row.get(k, 0.0) + c
        self.rows.append(row)
        self.sense.append(sense)
        self.rhs.append(float(rhs))
        self.row_names.append(name)


def _nets_with_pins(design):
    return [e for e, net in enumerate(design.nets) if len(net.pins)]


def milp_objective(design, placement):
    """Total HPWL plus the spread between the largest and smallest net HPWL,
    evaluated directly from coordinates."""
    pins = pin_positions(design, placement)
    _, _, ptr = design.pin_table()
    vals = []
    for e in _nets_with_pins(design):
        p = pins[ptr[e]:ptr[e + 1]]
        vals.append(float(p[:, 0].max() - p[:, 0].min() + p[:, 1].max() - p[:, 1].min()))
    if not vals:
        return 0.0
    return math.fsum(vals) + (max(vals) - min(vals))


def _rects(design, placement):
    eff = effective_dims(design, placement.r)
    return [Rect(float(placement.x[i]), float(placement.y[i]), float(eff[i, 0]), float(eff[i, 1]))
            for i in range(design.n)]


def _relation(a, b, horizontal):
    if horizontal:
        return "left" if a.x < b.x or (a.x == b.x and a.x2 <= b.x2) else "right"
    return "under" if a.y < b.y or (a.y == b.y and a.y2 <= b.y2) else "over"


def constrained_pairs(design):
    """Unordered pairs that need non-overlap: at least one side movable."""
    fixed = [c.fixed for c in design.components]
    return [(i, j) for i in range(design.n) for j in range(i + 1, design.n)
            if not (fixed[i] and fixed[j])]


def default_threshold(design):
    return 0.05 * max(design.board.width, design.board.height)


def derive_relative_constraints(placement, design, k=None):
    """Freeze the relation of every pair whose footprints are at least ``k``
    apart along some axis, using the axis with the larger gap (horizontal on
    ties) and the pair's current ordering along it."""
    k = default_threshold(design) if k is None else float(k)
    rects = _rects(design, placement)
    out = []
    for i, j in constrained_pairs(design):
        dx, dy = rect_gap(rects[i], rects[j])
        if max(dx, dy) >= k:
            out.append(RelConstraint(i, j, _relation(rects[i], rects[j], dx >= dy)))
    return out


def relation_holds(design, placement, rel, tol=0.0):
    """Whether ``rel`` holds, compared on the length lattice."""
    eff = to_lattice(effective_dims(design, placement.r))
    x, y = to_lattice(placement.x), to_lattice(placement.y)
    t = int(to_lattice(tol))
    i, j = rel.i, rel.j
    return {
        "left": x[i] + eff[i, 0] <= x[j] + t,
        "right": x[j] + eff[j, 0] <= x[i] + t,
        "under": y[i] + eff[i, 1] <= y[j] + t,
        "over": y[j] + eff[j, 1] <= y[i] + t,
    }[rel.direction]


def build_model(design, rels=()):
    """Assemble the legalization model; ``rels`` prune the listed pairs."""
    W, H = design.board.width, design.board.height
    b = _Builder()
    n = design.n
    cv = np.zeros((n, 3), dtype=np.intp)
    for i, c in enumerate(design.components):
        cv[i, 0] = b.var(f"x{i}", 0.0, W)
        cv[i, 1] = b.var(f"y{i}", 0.0, H)
        cv[i, 2] = b.var(f"r{i}", 0.0, 1.0, binary=not c.fixed)
    dims = design.dims()

    def width_terms(i):
        w, h = dims[i]
        return [(cv[i, 0], 1.0), (cv[i, 2], h - w)], w

    def height_terms(i):
        w, h = dims[i]
        return [(cv[i, 1], 1.0), (cv[i, 2], w - h)], h

    for i, c in enumerate(design.components):
        if c.fixed:
            fx, fy, fr = c.fixed_position
            b.row(f"fix_x{i}", [(cv[i, 0], 1.0)], "E", fx)
            b.row(f"fix_y{i}", [(cv[i, 1], 1.0)], "E", fy)
            b.row(f"fix_r{i}", [(cv[i, 2], 1.0)], "E", fr)
        t, w = width_terms(i)
        b.row(f"bx{i}", t, "L", W - w)
        t, h = height_terms(i)
        b.row(f"by{i}", t, "L", H - h)

    by_pair = {}
    for rel in rels:
        if rel.pair in by_pair:
            raise ValueError(f"pair {rel.pair} constrained twice")
        by_pair[rel.pair] = rel
    pair_vars = {}
    for i, j in constrained_pairs(design):
        rel = by_pair.get((i, j))
        if rel is not None:
            a, c = (rel.i, rel.j)
            d = rel.direction
            if d in ("left", "right"):
                lo, hi = (a, c) if d == "left" else (c, a)
                t, w = width_terms(lo)
                b.row(f"rel{i}_{j}", t + [(cv[hi, 0], -1.0)], "L", -w)
            else:
                lo, hi = (a, c) if d == "under" else (c, a)
                t, h = height_terms(lo)
                b.row(f"rel{i}_{j}", t + [(cv[hi, 1], -1.0)], "L", -h)
            continue
        p = b.var(f"p{i}_{j}", 0.0, 1.0, binary=True)
        q = b.var(f"q{i}_{j}", 0.0, 1.0, binary=True)
        pair_vars[(i, j)] = (p, q)
        t, wi = width_terms(i)
        b.row(f"L{i}_{j}", t + [(cv[j, 0], -1.0), (p, -W), (q, -W)], "L", -wi)
        t, hi_ = height_terms(i)
        b.row(f"U{i}_{j}", t + [(cv[j, 1], -1.0), (p, -H), (q, H)], "L", H - hi_)
        t, wj = width_terms(j)
        b.row(f"R{i}_{j}", t + [(cv[i, 0], -1.0), (p, W), (q, -W)], "L", W - wj)
        t, hj = height_terms(j)
        b.row(f"O{i}_{j}", t + [(cv[i, 1], -1.0), (p, H), (q, H)], "L", 2 * H - hj)

    nets = _nets_with_pins(design)
    spread = []
    for e in nets:
        ux = b.var(f"ux{e}", 0.0, W, obj=1.0)
        lx = b.var(f"lx{e}", 0.0, W, obj=-1.0)
        uy = b.var(f"uy{e}", 0.0, H, obj=1.0)
        ly = b.var(f"ly{e}", 0.0, H, obj=-1.0)
        for k, (cid, pid) in enumerate(design.nets[e].pins):
            i = design.index(cid)
            pin = design.components[i].pin(pid)
            h = dims[i, 1]
            # px = x + ox + r (h - oy - ox),  py = y + oy + r (ox - oy)
            ax, ay = h - pin.oy - pin.ox, pin.ox - pin.oy
            b.row(f"ux{e}_{k}", [(cv[i, 0], 1.0), (cv[i, 2], ax), (ux, -1.0)], "L", -pin.ox)
            b.row(f"lx{e}_{k}", [(cv[i, 0], 1.0), (cv[i, 2], ax), (lx, -1.0)], "G", -pin.ox)
            b.row(f"uy{e}_{k}", [(cv[i, 1], 1.0), (cv[i, 2], ay), (uy, -1.0)], "L", -pin.oy)
            b.row(f"ly{e}_{k}", [(cv[i, 1], 1.0), (cv[i, 2], ay), (ly, -1.0)], "G", -pin.oy)
        spread.append((e, [(ux, 1.0), (lx, -1.0), (uy, 1.0), (ly, -1.0)]))
    if spread:
        hmax = b.var("hmax", 0.0, W + H, obj=1.0)
        hmin = b.var("hmin", 0.0, W + H, obj=-1.0)
        for e, t in spread:
            b.row(f"hmax{e}", t + [(hmax, -1.0)], "L", 0.0)
            b.row(f"hmin{e}", t + [(hmin, -1.0)], "G", 0.0)

    return MilpModel(b.names, np.array(b.lb, dtype=float), np.array(b.ub, dtype=float),
                     np.array(b.binary, dtype=bool), np.array(b.obj, dtype=float),
                     b.rows, b.sense, b.rhs, b.row_names, design, tuple(rels), cv, pair_vars)


# --------------------------------------------------------------------- solving

def _relations_from_solution(model, v):
    rels = list(model.rels)
    for (i, j), (p, q) in model.pair_vars.items():
        rels.append(RelConstraint(i, j, _FROM_PQ[(int(round(v[p])), int(round(v[q])))]))
    return rels


def repair(design, placement, rels, decimals=6, rounds=8):
    """Make ``placement`` satisfy ``rels`` and the board exactly after an LP
    solve with small tolerance violations.

    Coordinates are rounded to ``decimals`` places and moved to the length
    lattice.  Each axis is then swept in topological order of its relations,
    pushing successors past their predecessors, and back in reverse order,
    pulling components below their successors and the board edge.  Sweeps
    repeat until nothing moves.  Fixed components never move.
    """
    p = placement.copy()
    mov = design.movable
    if decimals is not None:
        p.x[mov] = np.round(p.x[mov], decimals)
        p.y[mov] = np.round(p.y[mov], decimals)
    eff = to_lattice(effective_dims(design, p.r))
    limits = to_lattice([design.board.width, design.board.height])
    for axis, coord in ((0, p.x), (1, p.y)):
        pos = to_lattice(coord)
        size = eff[:, axis]
        preds = {i: [] for i in range(design.n)}
        succs = [[] for _ in range(design.n)]
        for rel in rels:
            d = rel.direction
            if (d in ("left", "right")) != (axis == 0):
                continue
            a, c = (rel.i, rel.j) if d in ("left", "under") else (rel.j, rel.i)
            preds[c].append(a)
            succs[a].append(c)
        order = list(TopologicalSorter(preds).static_order())
        for _ in range(rounds):
            before = pos.copy()
            for c in order:
                if mov[c]:
                    pos[c] = max([pos[c], 0] + [pos[a] + size[a] for a in preds[c]])
            for a in reversed(order):
                if mov[a]:
                    hi = min([limits[axis]] + [pos[c] for c in succs[a]]) - size[a]
                    pos[a] = max(min(pos[a], hi), 0)
            if np.array_equal(pos, before):
                break
        coord[mov] = pos[mov] / LATTICE
    p.x += 0.0  # turn any -0.0 into 0.0 for stable output text
    p.y += 0.0
    return p


def solve_milp(model, cfg=BnbConfig(), warm=None):
    """Branch-and-bound solve; returns a :class:`MilpResult`.

    ``warm`` may be a placement; its relative order seeds the incumbent when
    the model with every binary fixed to that order is feasible.
    """
    incumbent = None
    if warm is not None and model.design is not None:
        incumbent = warm_incumbent(model, warm)
    res = branch_and_bound(model, cfg, incumbent)
    placement = None
    if res.x is not None and model.design is not None:
        rels = _relations_from_solution(model, res.x)
        placement = repair(model.design, model.placement(res.x).with_fixed(model.design), rels)
    elif res.x is not None and model.comp_vars is not None:
        placement = model.placement(res.x)
    log.info("MILP: %s after %d nodes, objective %.9g", res.status, res.nodes, res.objective)
    return MilpResult(placement, res.status, res.objective, res.nodes, res.elapsed, res.x)


@dataclass
class MilpResult:
    placement: Placement | None
    status: str
    objective: float
    nodes: int
    elapsed: float
    values: np.ndarray | None = None

    def __iter__(self):
        return iter((self.placement, self.status))


def _elastic(model):
    """Copy of ``model`` whose pair rows may be violated by a nonnegative
    slack; the objective is total slack."""
    names = list(model.names)
    lb, ub = list(model.lb), list(model.ub)
    binary = list(model.binary)
    rows = [dict(r) for r in model.rows]
    slack = {}
    for k, name in enumerate(model.row_names):
        if name[0] in "LURO" and name[1:2].isdigit():
            ij = tuple(int(t) for t in name[1:].split("_"))
            names.append(f"s{name}")
            lb.append(0.0)
            ub.append(np.inf)
            binary.append(False)
            rows[k][len(names) - 1] = -1.0
            slack.setdefault(ij, []).append(len(names) - 1)
    obj = np.zeros(len(names))
    for cols in slack.values():
        obj[cols] = 1.0
    el = MilpModel(names, np.array(lb), np.array(ub), np.array(binary, dtype=bool), obj, rows,
                   list(model.sense), list(model.rhs), list(model.row_names))
    return el, slack


def _fix_relations(model, lb, ub, r, relations):
    cv = model.comp_vars
    for i, c in enumerate(model.design.components):
        if not c.fixed:
            lb[cv[i, 2]] = ub[cv[i, 2]] = float(r[i])
    for ij, (p, q) in model.pair_vars.items():
        pv, qv = _PQ[relations[ij]]
        lb[p] = ub[p] = pv
        lb[q] = ub[q] = qv


def warm_incumbent(model, warm, max_flips=None):
    """Feasible solution vector with orientations from ``warm`` and every
    free pair fixed to a relation, or ``None``.

    Relations start from ``warm``'s relative order.  While the fixed model is
    infeasible, an elastic copy measures how far each pair's row must be
    relaxed; the pair needing the most relief switches to the other axis,
    ordered as in the elastic solution.
    """
    design = model.design
    warm = warm.with_fixed(design)
    rects = _rects(design, warm)
    relations = {}
    for ij in model.pair_vars:
        dx, dy = rect_gap(rects[ij[0]], rects[ij[1]])
        relations[ij] = _relation(rects[ij[0]], rects[ij[1]], dx >= dy)
    lp = LpRelaxation(model)
    el = None
    max_flips = 4 * len(model.pair_vars) if max_flips is None else max_flips
    tried = set()
    for _ in range(max_flips + 1):
        lb, ub = model.lb.copy(), model.ub.copy()
        _fix_relations(model, lb, ub, warm.r, relations)
        sol = lp.solve(lb, ub)
        if sol is not None:
            return sol[1]
        if not model.pair_vars:
            return None
        if el is None:
            el_model, slack = _elastic(model)
            el = LpRelaxation(el_model)
            n0 = model.num_vars
        elb = np.concatenate([lb, np.zeros(el.n - n0)])
        eub = np.concatenate([ub, np.full(el.n - n0, np.inf)])
        esol = el.solve(elb, eub)
        if esol is None:
            return None
        v = esol[1]
        worst, pick = 0.0, None
        for ij in model.pair_vars:
            amount = float(np.sum(v[slack[ij]]))
            if amount > worst + 1e-9 and (ij, relations[ij]) not in tried:
                worst, pick = amount, ij
        if pick is None:
            return None
        tried.add((pick, relations[pick]))
        i, j = pick
        cand = _rects(design, model.placement(v[:n0]))
        horizontal = relations[pick] in ("left", "right")
        new = _relation(cand[i], cand[j], not horizontal)
        if (pick, new) in tried:
            new = {"left": "right", "right": "left", "under": "over", "over": "under"}[new]
        relations[pick] = new
    return None


# -------------------------------------------------------------------- legalize

@dataclass(frozen=True)
class LegalizeConfig:
    k: float | None = None
    use_relations: bool = True
    bnb: BnbConfig = BnbConfig()


def legalize(design, gp, cfg=LegalizeConfig()):
    """Legal placement near ``gp``.  Returns the :class:`MilpResult`; raises
    :class:`InfeasibleError` or :class:`SolveTimeout` without a solution."""
    rels = derive_relative_constraints(gp, design, cfg.k) if cfg.use_relations else []
    model = build_model(design, rels)
    log.info("legalize: %d relative constraints, %d binaries", len(rels), model.num_binaries)
    res = solve_milp(model, cfg.bnb, warm=gp)
    if res.status == INFEASIBLE:
        raise InfeasibleError("legalization model is infeasible")
    if res.status == NO_SOLUTION:
        raise SolveTimeout("legalization hit its limit without a feasible solution")
    return res


__all__ = ["RelConstraint", "MilpModel", "MilpResult", "LegalizeConfig", "BnbConfig",
           "InfeasibleError", "SolveTimeout", "OPTIMAL", "FEASIBLE_TIMEOUT", "INFEASIBLE",
           "NO_SOLUTION", "derive_relative_constraints", "build_model", "solve_milp", "legalize",
           "repair", "milp_objective", "relation_holds", "warm_incumbent", "default_threshold"]
