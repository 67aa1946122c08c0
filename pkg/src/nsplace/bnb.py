"""Branch-and-bound over binary variables with LP relaxations.

Node relaxations are solved with the HiGHS dual simplex.  The
search dives depth first, taking the child on the rounding side of the
branching variable, and restarts from the open node with the lowest parent
bound whenever a dive ends.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass

import numpy as np
import highspy

log = logging.getLogger(__name__)

INT_TOL = 1e-6

OPTIMAL = "optimal"
FEASIBLE_TIMEOUT = "feasible-timeout"
INFEASIBLE = "infeasible"
NO_SOLUTION = "timeout-no-solution"


@dataclass(frozen=True)
class BnbConfig:
    """Search limits.

    ``time_cap`` is wall-clock seconds.  ``node_limit`` bounds the number of
    LP relaxations solved and, unlike the time cap, gives results that do not
    depend on machine speed.
    """

    time_cap: float = 4 * 3600.0
    gap: float = 1e-6
    node_limit: int | None = None

    def __post_init__(self):
        if not self.time_cap > 0:
            raise ValueError("time cap must be positive")
        if self.gap < 0:
            raise ValueError("gap tolerance must be nonnegative")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node limit must be at least 1")


@dataclass
class BnbResult:
    x: np.ndarray | None
    objective: float
    status: str
    nodes: int
    elapsed: float


class LpRelaxation:
    """A model's continuous relaxation held in one HiGHS instance.

    Nodes differ only in variable bounds, so each solve changes the bounds
    and re-runs the dual simplex from the previous basis.
    """

    def __init__(self, model):
        A = model.matrix().tocsc()
        sense = np.asarray(model.sense)
        rhs = np.asarray(model.rhs, dtype=float)
        inf = highspy.kHighsInf
        lp = highspy.HighsLp()
        nv, nr = len(model.obj), len(rhs)
        lp.num_col_ = nv
        lp.num_row_ = nr
        self.c = np.asarray(model.obj, dtype=float)
        lp.col_cost_ = self.c
        lp.col_lower_ = np.asarray(model.lb, dtype=float)
        lp.col_upper_ = np.asarray(model.ub, dtype=float)
        lp.row_lower_ = np.where(sense == "L", -inf, rhs) if nr else np.zeros(0)
        lp.row_upper_ = np.where(sense == "G", inf, rhs) if nr else np.zeros(0)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = A.indptr.astype(np.int32)
        lp.a_matrix_.index_ = A.indices.astype(np.int32)
        lp.a_matrix_.value_ = A.data.astype(float)
        self.h = highspy.Highs()
        self.h.setOptionValue("output_flag", False)
        self.h.setOptionValue("threads", 1)
        self.h.passModel(lp)
        self.n = nv
        self.idx = np.arange(nv, dtype=np.int32)
        self.lps = 0

    def solve(self, lb, ub):
        """Return ``(objective, x)`` or ``None`` when infeasible."""
        self.lps += 1
        if np.any(lb > ub + 1e-12):
            return None
        if self.n == 0:
            return 0.0, np.zeros(0)
        self.h.changeColsBounds(self.n, self.idx, np.asarray(lb, dtype=float),
                                np.asarray(ub, dtype=float))
        self.h.run()
        status = self.h.getModelStatus()
        if status == highspy.HighsModelStatus.kInfeasible:
            return None
        if status != highspy.HighsModelStatus.kOptimal:
            # A stale basis occasionally stalls; retry from scratch once.
            self.h.clearSolver()
            self.h.run()
            status = self.h.getModelStatus()
            if status == highspy.HighsModelStatus.kInfeasible:
                return None
            if status != highspy.HighsModelStatus.kOptimal:
                raise RuntimeError(f"LP relaxation failed: {self.h.modelStatusToString(status)}")
        x = np.array(self.h.getSolution().col_value, dtype=float)
        return float(self.c @ x), x


def _most_fractional(x, binaries):
    vals = x[binaries]
    frac = np.minimum(vals - np.floor(vals), np.ceil(vals) - vals)
    k = int(np.argmax(frac))  # first maximum: lowest index wins ties
    if frac[k] <= INT_TOL:
        return None
    return int(binaries[k])


def branch_and_bound(model, cfg=BnbConfig(), incumbent=None):
    """Minimize ``model`` over its binaries.

    ``incumbent`` is an optional feasible variable vector used as the starting
    upper bound.
    """
    t0 = time.monotonic()
    lp = LpRelaxation(model)
    binaries = np.flatnonzero(model.binary)
    lb0 = np.asarray(model.lb, dtype=float).copy()
    ub0 = np.asarray(model.ub, dtype=float).copy()
    best_x, best_f = None, np.inf
    if incumbent is not None:
        best_x = np.asarray(incumbent, dtype=float).copy()
        best_f = float(lp.c @ best_x)
    seq = itertools.count()
    heap = []
    node = (lb0, ub0)
    nodes = 0
    limited = False

    def finish(status):
        f = best_f if best_x is not None else np.inf
        return BnbResult(best_x, f, status, nodes, time.monotonic() - t0)

    while True:
        if node is None:
            while heap and heap[0][0] >= best_f - cfg.gap:
                heapq.heappop(heap)
            if not heap:
                break
            _, _, lb, ub = heapq.heappop(heap)
            node = (lb, ub)
        if (cfg.node_limit is not None and nodes >= cfg.node_limit) or \
                time.monotonic() - t0 > cfg.time_cap:
            limited = True
            break
        lb, ub = node
        node = None
        sol = lp.solve(lb, ub)
        nodes += 1
        if sol is None:
            if nodes == 1 and best_x is None:
                return finish(INFEASIBLE)
            continue
        f, x = sol
        if f >= best_f - cfg.gap:
            continue
        j = _most_fractional(x, binaries) if len(binaries) else None
        if j is None:
            if len(binaries):
                rounded = np.round(x[binaries])
                if np.any(rounded != x[binaries]):
                    lb, ub = lb.copy(), ub.copy()
                    lb[binaries] = ub[binaries] = rounded
                    sol = lp.solve(lb, ub)
                    if sol is None:
                        continue
                    f, x = sol
                    x[binaries] = rounded
            if f < best_f:
                best_f, best_x = f, x
                log.debug("incumbent %.9g at node %d", f, nodes)
            continue
        down = (lb, ub.copy())
        down[1][j] = 0.0
        up = (lb.copy(), ub)
        up[0][j] = 1.0
        first, second = (up, down) if x[j] >= 0.5 else (down, up)
        heapq.heappush(heap, (f, next(seq), second[0], second[1]))
        node = first

    if limited:
        return finish(FEASIBLE_TIMEOUT if best_x is not None else NO_SOLUTION)
    if best_x is None:
        return finish(INFEASIBLE)
    return finish(OPTIMAL)
