"""Independent reference implementations used by the test suite.

Nothing here imports the package's numerical code; each oracle is a slow,
direct evaluation of the defining formula.
"""
import itertools
import math

import numpy as np
from scipy.optimize import linprog

_GOLD = (math.sqrt(5) - 1) / 2


def _residual(a, b, g):
    """Residual for projected pins ``a`` (positive side) and ``b`` over
    broadcast arrays; ``a``/``b`` have the pin axis last."""
    ra = np.maximum(0.0, g[..., None] + 1.0 - a)
    rb = np.maximum(0.0, b - g[..., None] + 1.0)
    return np.sqrt((ra * ra).sum(-1)) + np.sqrt((rb * rb).sum(-1))


def _min_over_gamma(a, b, iters=56):
    """Minimum over gamma of the convex residual, by golden-section search
    on the bracket where the optimum must lie (accurate to ~1e-9 of the
    bracket width)."""
    lo = np.minimum(a.min(-1), b.min(-1)) - 1.0
    hi = np.maximum(a.max(-1), b.max(-1)) + 1.0
    x1 = hi - _GOLD * (hi - lo)
    x2 = lo + _GOLD * (hi - lo)
    f1, f2 = _residual(a, b, x1), _residual(a, b, x2)
    for _ in range(iters):
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        xn = np.where(left, hi - _GOLD * (hi - lo), lo + _GOLD * (hi - lo))
        fn = _residual(a, b, xn)
        x1, x2 = np.where(left, xn, x2), np.where(left, x1, xn)
        f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
    return np.minimum(f1, f2)


def _grid_eval(A, B, angles, scales):
    """Residual minimized over gamma on an (angle, norm) grid; ``scales``
    is 1-D (shared) or 2-D (one row per angle)."""
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)           # (K, 2)
    pa = d @ A.T                                                       # (K, na)
    pb = d @ B.T
    S = scales if scales.ndim == 2 else np.broadcast_to(scales, (len(angles), len(scales)))
    return _min_over_gamma(S[:, :, None] * pa[:, None, :], S[:, :, None] * pb[:, None, :])


_SCALES = np.concatenate([[0.0], np.logspace(-2, 3, 21)])


def _best_per_direction(A, B, angles, points=101):
    """For each direction, the residual minimized over gamma and norm.

    A coarse norm grid brackets the minimizer (the gamma-minimized residual
    is convex in the norm along a fixed direction); two finer grids over
    the bracket then close in on it."""
    F = _grid_eval(A, B, angles, _SCALES)
    k = np.argmin(F, axis=1)
    lo = _SCALES[np.maximum(k - 1, 0)]
    hi = _SCALES[np.minimum(k + 1, len(_SCALES) - 1)]
    best = F.min(axis=1)
    t = np.linspace(0.0, 1.0, points)
    for _ in range(2):
        S = lo[:, None] + (hi - lo)[:, None] * t[None, :]
        G = _grid_eval(A, B, angles, S)
        j = np.argmin(G, axis=1)
        best = np.minimum(best, G[np.arange(len(angles)), j])
        step = (hi - lo) / (points - 1)
        mid = S[np.arange(len(angles)), j]
        lo, hi = np.maximum(mid - step, 0.0), mid + step
    return best


def separator_oracle(A, B, angles=720):
    """Brute-force minimum of the separation residual.

    A uniform grid of directions and log-spaced norms, each with an exact
    gamma line search, ranks the directions.  The best sixty get a full
    norm search, and the best three of those are rescanned on successively
    finer angular grids.
    """
    A = np.asarray(A, float).reshape(-1, 2)
    B = np.asarray(B, float).reshape(-1, 2)
    th = np.arange(angles) * (2 * np.pi / angles)
    coarse = _grid_eval(A, B, th, _SCALES).min(axis=1)
    keep = np.sort(np.argsort(coarse, kind="stable")[:60])
    th = th[keep]
    F = _best_per_direction(A, B, th)
    best = float(F.min())
    for k in np.argsort(F, kind="stable")[:3]:
        t0, step = th[k], 2 * np.pi / angles
        for _ in range(3):
            fine = t0 + np.linspace(-step, step, 21)
            G = _best_per_direction(A, B, fine)
            j = int(np.argmin(G))
            best = min(best, float(G[j]))
            t0, step = fine[j], step / 10
    return best


def hulls_overlap(A, B):
    """Do the convex hulls share a point?  LP feasibility of
    ``sum l_i a_i = sum m_j b_j`` over two simplices."""
    A = np.asarray(A, float).reshape(-1, 2)
    B = np.asarray(B, float).reshape(-1, 2)
    na, nb = len(A), len(B)
    Aeq = np.zeros((4, na + nb))
    Aeq[0:2, :na] = A.T
    Aeq[0:2, na:] = -B.T
    Aeq[2, :na] = 1
    Aeq[3, na:] = 1
    res = linprog(np.zeros(na + nb), A_eq=Aeq, b_eq=[0, 0, 1, 1], bounds=(0, None), method="highs")
    return res.status == 0


def _point_segment(p, a, b):
    ab = b - a
    L = ab @ ab
    t = 0.0 if L == 0 else min(1.0, max(0.0, (p - a) @ ab / L))
    return float(np.hypot(*(a + t * ab - p)))


def hull_distance(A, B):
    """Euclidean distance between the convex hulls (0 when they meet).  For
    disjoint hulls the minimum is attained between a vertex of one and an
    edge of the other; every pin pair is tried as an edge."""
    A = np.asarray(A, float).reshape(-1, 2)
    B = np.asarray(B, float).reshape(-1, 2)
    if hulls_overlap(A, B):
        return 0.0
    best = math.inf
    for P, Q in ((A, B), (B, A)):
        segs = [(Q[i], Q[j]) for i in range(len(Q)) for j in range(i, len(Q))]
        for p in P:
            for a, b in segs:
                best = min(best, _point_segment(p, a, b))
    return best


def _seg_cross(s1, s2):
    """Proper or touching intersection excluding a lone shared endpoint."""
    (a, b), (c, d) = s1, s2

    def orient(o, p, q):
        v = (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])
        return 0 if abs(v) <= 1e-9 else (1 if v > 0 else -1)

    def within(p, q, r):
        return (min(p[0], q[0]) - 1e-9 <= r[0] <= max(p[0], q[0]) + 1e-9
                and min(p[1], q[1]) - 1e-9 <= r[1] <= max(p[1], q[1]) + 1e-9)

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    shared = [p for p in (a, b) for q in (c, d) if math.dist(p, q) <= 1e-9]
    if o1 == o2 == o3 == o4 == 0:
        # Collinear: compare 1-D overlap length along the dominant axis.
        k = 0 if abs(b[0] - a[0]) + abs(d[0] - c[0]) >= abs(b[1] - a[1]) + abs(d[1] - c[1]) else 1
        lo = max(min(a[k], b[k]), min(c[k], d[k]))
        hi = min(max(a[k], b[k]), max(c[k], d[k]))
        if hi - lo > 1e-9:
            return True
        return hi - lo >= -1e-9 and not shared
    meet = ((o1 != o2 and o3 != o4) or (o1 == 0 and within(a, b, c)) or (o2 == 0 and within(a, b, d))
            or (o3 == 0 and within(c, d, a)) or (o4 == 0 and within(c, d, b)))
    return meet and not shared


def crossings_bruteforce(segments):
    """All-pairs count over ``[(net, (p, q)), ...]`` of intersecting
    segments from different nets."""
    n = 0
    for (e, s), (f, t) in itertools.combinations(segments, 2):
        if e != f and _seg_cross(s, t):
            n += 1
    return n


def grid_milp_optimum(design, grid=0.5):
    """Optimal total HPWL plus net-HPWL range over every non-overlapping,
    in-bounds placement with coordinates on ``grid`` and both orientations.
    Components must be movable; returns ``inf`` when nothing fits."""
    W, H = design.board.width, design.board.height
    n = design.n
    choices = []
    for c in design.components:
        opts = []
        for r in (0, 1):
            w, h = (c.height, c.width) if r else (c.width, c.height)
            if r and w == h and c.width == c.height and all(
                    (p.ox, p.oy) == (c.height - p.oy, p.ox) for p in c.pins):
                continue
            xs = np.arange(0.0, W - w + 1e-9, grid)
            ys = np.arange(0.0, H - h + 1e-9, grid)
            opts += [(x, y, r, w, h) for x in xs for y in ys]
        choices.append(np.array(opts))
    pin_of = {}
    for i, c in enumerate(design.components):
        for p in c.pins:
            pin_of[(c.id, p.id)] = (i, p.ox, p.oy, c.height)
    nets = [[pin_of[ref] for ref in net.pins] for net in design.nets if net.pins]

    # Grow partial assignments component by component, pruning overlaps.
    partial = choices[0][:, None, :] if n else np.zeros((1, 0, 5))
    for i in range(1, n):
        new = choices[i]
        P, C = len(partial), len(new)
        comb = np.concatenate([np.repeat(partial, C, axis=0),
                               np.tile(new, (P, 1))[:, None, :]], axis=1)
        ok = np.ones(len(comb), dtype=bool)
        last = comb[:, -1, :]
        for j in range(i):
            o = comb[:, j, :]
            sep = ((o[:, 0] + o[:, 3] <= last[:, 0] + 1e-9) | (last[:, 0] + last[:, 3] <= o[:, 0] + 1e-9)
                   | (o[:, 1] + o[:, 4] <= last[:, 1] + 1e-9) | (last[:, 1] + last[:, 4] <= o[:, 1] + 1e-9))
            ok &= sep
        partial = comb[ok]
        if not len(partial):
            return math.inf
    if not nets:
        return 0.0
    hp = []
    for net in nets:
        px, py = [], []
        for i, ox, oy, h in net:
            x, y, r = partial[:, i, 0], partial[:, i, 1], partial[:, i, 2]
            px.append(np.where(r == 1, x + h - oy, x + ox))
            py.append(np.where(r == 1, y + ox, y + oy))
        px, py = np.array(px), np.array(py)
        hp.append(px.max(0) - px.min(0) + py.max(0) - py.min(0))
    hp = np.array(hp)
    total = hp.sum(0) + hp.max(0) - hp.min(0)
    return float(total.min())


def relation_structures(n, W, H):
    """Every choice of one relation per component pair (left, right, under
    or over, as precedence edges on x or y) that unit squares can satisfy on
    a ``W x H`` board: both precedence graphs acyclic with longest chains
    that fit."""
    pairs = list(itertools.combinations(range(n), 2))
    out = []

    def fits(edges, length):
        succ = {i: [] for i in range(n)}
        indeg = [0] * n
        for i, j in edges:
            succ[i].append(j)
            indeg[j] += 1
        depth, stack, seen = [1] * n, [i for i in range(n) if indeg[i] == 0], 0
        while stack:
            i = stack.pop()
            seen += 1
            for j in succ[i]:
                depth[j] = max(depth[j], depth[i] + 1)
                indeg[j] -= 1
                if indeg[j] == 0:
                    stack.append(j)
        return seen == n and (max(depth) if n else 0) <= length + 1e-9

    def rec(k, ex, ey):
        if not (fits(ex, W) and fits(ey, H)):
            return
        if k == len(pairs):
            out.append((tuple(ex), tuple(ey)))
            return
        i, j = pairs[k]
        rec(k + 1, ex + [(i, j)], ey)
        rec(k + 1, ex + [(j, i)], ey)
        rec(k + 1, ex, ey + [(i, j)])
        rec(k + 1, ex, ey + [(j, i)])

    rec(0, [], [])
    return out


def exhaustive_milp_optimum(design):
    """Exact optimum of total HPWL plus net-HPWL range for movable unit
    squares: every orientation vector times every feasible relation
    structure, each leaf a linear program over continuous positions."""
    n = design.n
    W, H = design.board.width, design.board.height
    assert all(c.width == 1 and c.height == 1 and not c.fixed for c in design.components)
    idx = {c.id: i for i, c in enumerate(design.components)}
    nets = [[(idx[cid], design.components[idx[cid]].pin(pid)) for cid, pid in net.pins]
            for net in design.nets if net.pins]
    m = len(nets)
    if m == 0:
        return 0.0
    structures = relation_structures(n, W, H)
    nv = 2 * n + 4 * m + 2                       # x, y, (ux, lx, uy, ly) per net, hmax, hmin
    X, Y = 0, n
    UX, LX, UY, LY = (2 * n + k for k in range(4))
    HMAX, HMIN = nv - 2, nv - 1
    c = np.zeros(nv)
    for e in range(m):
        c[[UX + 4 * e, UY + 4 * e]] = 1
        c[[LX + 4 * e, LY + 4 * e]] = -1
    c[HMAX], c[HMIN] = 1, -1
    bounds = [(0, W - 1)] * n + [(0, H - 1)] * n + [(None, None)] * (4 * m + 2)
    best = math.inf
    for r in itertools.product((0, 1), repeat=n):
        rows, rhs = [], []
        for e, net in enumerate(nets):
            for i, p in net:
                ox, oy = (1 - p.oy, p.ox) if r[i] else (p.ox, p.oy)
                for coord, off, upper, lower in ((X + i, ox, UX, LX), (Y + i, oy, UY, LY)):
                    row = np.zeros(nv)                 # coord + off <= upper
                    row[coord], row[upper + 4 * e] = 1, -1
                    rows.append(row)
                    rhs.append(-off)
                    row = np.zeros(nv)                 # lower <= coord + off
                    row[coord], row[lower + 4 * e] = -1, 1
                    rows.append(row)
                    rhs.append(off)
            span = np.zeros(nv)
            span[[UX + 4 * e, UY + 4 * e]] = 1
            span[[LX + 4 * e, LY + 4 * e]] = -1
            up = span.copy()
            up[HMAX] = -1                              # span - hmax <= 0
            dn = -span
            dn[HMIN] = 1                               # hmin - span <= 0
            rows += [up, dn]
            rhs += [0.0, 0.0]
        base_rows, base_rhs = np.array(rows), np.array(rhs)
        for ex, ey in structures:
            sep = np.zeros((len(ex) + len(ey), nv))
            for k, (i, j) in enumerate(ex):              # x_i + 1 <= x_j
                sep[k, X + i], sep[k, X + j] = 1, -1
            for k, (i, j) in enumerate(ey, len(ex)):
                sep[k, Y + i], sep[k, Y + j] = 1, -1
            A = np.vstack([base_rows, sep])
            b = np.concatenate([base_rhs, np.full(len(sep), -1.0)])
            res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
            if res.status == 0:
                best = min(best, float(res.fun))
    return best
