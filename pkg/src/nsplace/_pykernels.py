"""Pure numpy implementations of the hot kernels.

Mirrors ``_ckernels`` function for function; selected by :mod:`nsplace.kernels`
when the compiled extension is unavailable.  Pins are passed flat as an
``(P, 2)`` array with a CSR ``net_ptr`` over nets.
"""
import numpy as np

BACKEND = "python"

_SEP_TOL = 1e-9
_EPS_SCHEDULE = (1e-3, 1e-6, 1e-9)
_NEWTON_ITERS = 60


# ---------------------------------------------------------------------------
# weighted-average wirelength

def _wa_axis(v, c):
    vmax, vmin = v.max(), v.min()
    a = np.exp((v - vmax) / c)
    b = np.exp((vmin - v) / c)
    sa, sb = a.sum(), b.sum()
    wp = (v * a).sum() / sa
    wn = (v * b).sum() / sb
    g = a / sa * (1.0 + (v - wp) / c) - b / sb * (1.0 - (v - wn) / c)
    return wp - wn, g


def wa_wirelength(pins, net_ptr, c):
    """Total WA wirelength, per-net values and per-pin gradient."""
    grad = np.zeros_like(pins)
    m = len(net_ptr) - 1
    vals = np.zeros(m)
    for e in range(m):
        lo, hi = net_ptr[e], net_ptr[e + 1]
        if hi - lo < 2:
            continue
        wx, gx = _wa_axis(pins[lo:hi, 0], c)
        wy, gy = _wa_axis(pins[lo:hi, 1], c)
        vals[e] = wx + wy
        grad[lo:hi, 0] = gx
        grad[lo:hi, 1] = gy
    return vals.sum(), vals, grad


# ---------------------------------------------------------------------------
# bin density

def theta(d, w):
    """Smoothed bin overlap as a function of center distance ``d >= 0``."""
    d = np.abs(np.asarray(d, dtype=float))
    return np.where(d <= w / 2, 1.0 - 2.0 * d * d / (w * w),
                    np.where(d <= w, 2.0 * (d - w) ** 2 / (w * w), 0.0))


def _theta_and_slope(delta, w):
    d = np.abs(delta)
    s = np.sign(delta)
    inner = d <= w / 2
    outer = (~inner) & (d <= w)
    t = np.where(inner, 1.0 - 2.0 * d * d / (w * w), np.where(outer, 2.0 * (d - w) ** 2 / (w * w), 0.0))
    dt = np.where(inner, -4.0 * d / (w * w), np.where(outer, 4.0 * (d - w) / (w * w), 0.0)) * s
    return t, dt


def density(cx, cy, area, nx, ny, bw, bh, target):
    """Bin density cost with gradient w.r.t. component centers.

    Returns ``(D, bins, gx, gy)`` where ``bins`` is the ``(nx, ny)`` array of
    normalized bin occupancies.
    """
    n = len(cx)
    bx = (np.arange(nx) + 0.5) * bw
    by = (np.arange(ny) + 0.5) * bh
    tx, dtx = _theta_and_slope(cx[:, None] - bx[None, :], bw)
    ty, dty = _theta_and_slope(cy[:, None] - by[None, :], bh)
    sx = tx.sum(axis=1)
    sy = ty.sum(axis=1)
    sx = np.where(sx > 0, sx, 1.0)
    sy = np.where(sy > 0, sy, 1.0)
    px = tx / sx[:, None]
    py = ty / sy[:, None]
    bins = np.einsum("i,ij,ik->jk", area, px, py) if n else np.zeros((nx, ny))
    resid = bins - target
    dens = float((resid * resid).sum())
    dpx = (dtx * sx[:, None] - tx * dtx.sum(axis=1)[:, None]) / (sx * sx)[:, None]
    dpy = (dty * sy[:, None] - ty * dty.sum(axis=1)[:, None]) / (sy * sy)[:, None]
    gx = 2.0 * area * np.einsum("ij,jk,ik->i", dpx, resid, py)
    gy = 2.0 * area * np.einsum("ij,jk,ik->i", px, resid, dpy)
    return dens, bins, gx, gy


# ---------------------------------------------------------------------------
# net separation

def hull(points):
    """CCW hull vertices of an ``(k, 2)`` array, as an array."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and ((out[-1][0] - out[-2][0]) * (p[1] - out[-2][1])
                                     - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0])) <= 0.0:
                out.pop()
            out.append(p)
        return out

    h = half(pts)[:-1] + half(pts[::-1])[:-1]
    return np.array(h, dtype=float).reshape(-1, 2)


def _closest_on_segment(p, a, b):
    ab = b - a
    L = ab @ ab
    t = 0.0 if L == 0.0 else min(1.0, max(0.0, ((p - a) @ ab) / L))
    return a + t * ab


def _closest_pair(ha, hb):
    """Closest points between two vertex sets' hull boundaries (valid when disjoint)."""
    best = (np.inf, None, None)
    for P, Q, flip in ((ha, hb, False), (hb, ha, True)):
        k = len(Q)
        edges = [(Q[0], Q[0])] if k == 1 else [(Q[i], Q[(i + 1) % k]) for i in range(k if k > 2 else 1)]
        for p in P:
            for a, b in edges:
                q = _closest_on_segment(p, a, b)
                d = float((p - q) @ (p - q))
                if d < best[0]:
                    best = (d, q, p) if flip else (d, p, q)
    return best


def max_margin(A, B, ha=None, hb=None):
    """Hard-margin separator with ``A`` on the positive side, or ``None`` if
    the hulls are not strictly separable."""
    ha = hull(A) if ha is None else ha
    hb = hull(B) if hb is None else hb
    d2, p, q = _closest_pair(ha, hb)
    if not d2 > 1e-24:
        return None
    w = p - q
    scale = _SEP_TOL * (1.0 + np.abs(np.concatenate([A.ravel(), B.ravel()])).max()) * np.sqrt(d2)
    if (A @ w).min() < p @ w - scale or (B @ w).max() > q @ w + scale:
        return None
    u = 2.0 * w / d2
    return u, float(u @ (p + q) / 2.0)


def residual(A, B, u, g):
    r1 = np.maximum(0.0, g + 1.0 - A @ u)
    r2 = np.maximum(0.0, B @ u - g + 1.0)
    return float(np.sqrt(r1 @ r1) + np.sqrt(r2 @ r2))


def _smoothed(A, B, th, eps):
    u, g = th[:2], th[2]
    z1 = g + 1.0 - A @ u
    z2 = B @ u - g + 1.0
    val = 0.0
    grad = np.zeros(3)
    hess = np.zeros((3, 3))
    for z, M in ((z1, np.column_stack([-A, np.ones(len(A))])),
                 (z2, np.column_stack([B, -np.ones(len(B))]))):
        act = z > 0
        zp = np.where(act, z, 0.0)
        s = np.sqrt(zp @ zp + eps * eps)
        gi = M.T @ zp / s
        Ma = M[act]
        val += s
        grad += gi
        hess += Ma.T @ Ma / s - np.outer(gi, gi) / s
    return val, grad, hess


def _newton(A, B, th):
    th = th.astype(float).copy()
    for eps in _EPS_SCHEDULE:
        for _ in range(_NEWTON_ITERS):
            val, grad, hess = _smoothed(A, B, th, eps)
            mu = 1e-12 * (1.0 + np.trace(hess))
            try:
                step = -np.linalg.solve(hess + mu * np.eye(3), grad)
            except np.linalg.LinAlgError:
                step = -grad
            dec = grad @ step
            if dec >= 0:
                step, dec = -grad, -(grad @ grad)
            if -dec < 1e-20:
                break
            t = 1.0
            while t > 1e-12:
                nv = _smoothed(A, B, th + t * step, eps)[0]
                if nv <= val + 1e-4 * t * dec:
                    break
                t *= 0.5
            else:
                break
            th = th + t * step
            if abs(t * dec) < 1e-16 * (1.0 + val):
                break
    return th, residual(A, B, th[:2], th[2])


def _starts(A, B):
    ca, cb = A.mean(axis=0), B.mean(axis=0)
    allp = np.vstack([A, B])
    spread = float(np.ptp(allp, axis=0).max()) or 1.0
    dirs = [np.array(v, dtype=float) for v in ((1, 0), (-1, 0), (0, 1), (0, -1))]
    diff = ca - cb
    nd = np.hypot(*diff)
    c = diff / nd if nd > 1e-12 else np.array([1.0, 0.0])
    perp = np.array([-c[1], c[0]])
    dirs += [c, -c, perp, -perp]
    mid = (ca + cb) / 2.0
    out = []
    for d in dirs:
        u = d / spread
        out.append(np.array([u[0], u[1], u @ mid]))
    return out


def solve_separator(A, B, warm=None, prev_f=None, ha=None, hb=None):
    """Minimize the separation residual over ``(u, gamma)``.

    Returns ``(u, gamma, f)``.  ``warm`` is an optional ``(u0, u1, gamma)``
    start; a full restart is made when the warm solve worsens ``prev_f`` by
    more than 10 %.
    """
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    mm = max_margin(A, B, ha, hb)
    if mm is not None:
        u, g = mm
        return u, g, residual(A, B, u, g)
    best = None
    if warm is not None:
        th, f = _newton(A, B, np.asarray(warm, dtype=float))
        best = (f, th)
        if prev_f is not None and f <= 1.1 * prev_f:
            return th[:2].copy(), float(th[2]), f
    for th0 in _starts(A, B):
        th, f = _newton(A, B, th0)
        if best is None or f < best[0]:
            best = (f, th)
    # The cone apex u = 0 is where smoothed Newton stalls; test it exactly.
    for g in (-1.0, 1.0):
        th = np.array([0.0, 0.0, g])
        f = residual(A, B, th[:2], g)
        if f < best[0]:
            best = (f, th)
    f, th = best
    return th[:2].copy(), float(th[2]), f


def net_hulls(pins, net_ptr):
    return [hull(pins[net_ptr[e]:net_ptr[e + 1]]) for e in range(len(net_ptr) - 1)]


def solve_pairs(pins, net_ptr, pairs, U, G, F, warm, lo=0, hi=None):
    """Solve pairs ``lo:hi`` in place.  ``warm[k]`` marks a usable cached
    ``(U[k], G[k], F[k])``; it is set on return."""
    hi = len(pairs) if hi is None else hi
    hulls = {}
    for k in range(lo, hi):
        e, f = int(pairs[k, 0]), int(pairs[k, 1])
        for j in (e, f):
            if j not in hulls:
                hulls[j] = hull(pins[net_ptr[j]:net_ptr[j + 1]])
        A = pins[net_ptr[e]:net_ptr[e + 1]]
        B = pins[net_ptr[f]:net_ptr[f + 1]]
        w = (U[k, 0], U[k, 1], G[k]) if warm[k] else None
        u, g, val = solve_separator(A, B, w, F[k] if warm[k] else None, hulls[e], hulls[f])
        U[k] = u
        G[k] = g
        F[k] = val
        warm[k] = True


def ns_pin_grad(pins, net_ptr, pairs, U, G, scale, out):
    """Accumulate ``scale`` times the squared-hinge pin gradients into ``out``."""
    for k in range(len(pairs)):
        e, f = int(pairs[k, 0]), int(pairs[k, 1])
        u, g = U[k], G[k]
        lo, hi = net_ptr[e], net_ptr[e + 1]
        r = np.maximum(0.0, g + 1.0 - pins[lo:hi] @ u)
        out[lo:hi] += scale * (-2.0 * r[:, None] * u[None, :])
        lo, hi = net_ptr[f], net_ptr[f + 1]
        r = np.maximum(0.0, pins[lo:hi] @ u - g + 1.0)
        out[lo:hi] += scale * (2.0 * r[:, None] * u[None, :])
