# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  Same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"

cdef double SEP_TOL = 1e-9
cdef double[3] EPS_SCHEDULE = [1e-3, 1e-6, 1e-9]
cdef int NEWTON_ITERS = 60


# ---------------------------------------------------------------------------
# weighted-average wirelength

cdef void _wa_axis(double[:, ::1] pins, Py_ssize_t lo, Py_ssize_t hi, int ax, double c,
                   double* val, double[:, ::1] grad) noexcept nogil:
    cdef Py_ssize_t i
    cdef double vmax = pins[lo, ax], vmin = pins[lo, ax], v, a, b
    cdef double sa = 0, sb = 0, swa = 0, swb = 0, wp, wn
    for i in range(lo + 1, hi):
        v = pins[i, ax]
        if v > vmax:
            vmax = v
        if v < vmin:
            vmin = v
    for i in range(lo, hi):
        v = pins[i, ax]
        a = exp((v - vmax) / c)
        b = exp((vmin - v) / c)
        sa += a
        sb += b
        swa += v * a
        swb += v * b
    wp = swa / sa
    wn = swb / sb
    val[0] += wp - wn
    for i in range(lo, hi):
        v = pins[i, ax]
        a = exp((v - vmax) / c)
        b = exp((vmin - v) / c)
        grad[i, ax] = a / sa * (1.0 + (v - wp) / c) - b / sb * (1.0 - (v - wn) / c)


def wa_wirelength(double[:, ::1] pins, Py_ssize_t[::1] net_ptr, double c):
    cdef Py_ssize_t m = net_ptr.shape[0] - 1, e
    grad_arr = np.zeros((pins.shape[0], 2))
    vals_arr = np.zeros(m)
    cdef double[:, ::1] grad = grad_arr
    cdef double[::1] vals = vals_arr
    cdef double total = 0, v
    with nogil:
        for e in range(m):
            if net_ptr[e + 1] - net_ptr[e] < 2:
                continue
            v = 0
            _wa_axis(pins, net_ptr[e], net_ptr[e + 1], 0, c, &v, grad)
            _wa_axis(pins, net_ptr[e], net_ptr[e + 1], 1, c, &v, grad)
            vals[e] = v
            total += v
    return total, vals_arr, grad_arr


# ---------------------------------------------------------------------------
# bin density

cdef inline void _theta(double delta, double w, double* t, double* dt) noexcept nogil:
    cdef double d = fabs(delta), s = 1.0 if delta > 0 else (-1.0 if delta < 0 else 0.0)
    if d <= w / 2:
        t[0] = 1.0 - 2.0 * d * d / (w * w)
        dt[0] = -4.0 * d / (w * w) * s
    elif d <= w:
        t[0] = 2.0 * (d - w) * (d - w) / (w * w)
        dt[0] = 4.0 * (d - w) / (w * w) * s
    else:
        t[0] = 0.0
        dt[0] = 0.0


cdef enum:
    SUP = 5


cdef void _support(double c, double bw, Py_ssize_t nb, Py_ssize_t* j0, Py_ssize_t* cnt,
                   double* p, double* dp) noexcept nogil:
    cdef Py_ssize_t j, lo = <Py_ssize_t>((c - bw) / bw - 0.5) - 1, hi
    cdef double t, dt, s = 0, ds = 0
    cdef double tt[SUP]
    cdef double dtt[SUP]
    if lo < 0:
        lo = 0
    hi = lo + SUP
    if hi > nb:
        hi = nb
    if hi < lo:
        hi = lo
    for j in range(lo, hi):
        _theta(c - (j + 0.5) * bw, bw, &t, &dt)
        tt[j - lo] = t
        dtt[j - lo] = dt
        s += t
        ds += dt
    if s <= 0:
        s = 1.0
    for j in range(hi - lo):
        p[j] = tt[j] / s
        dp[j] = (dtt[j] * s - tt[j] * ds) / (s * s)
    j0[0] = lo
    cnt[0] = hi - lo


def density(double[::1] cx, double[::1] cy, double[::1] area, Py_ssize_t nx, Py_ssize_t ny,
            double bw, double bh, double target):
    cdef Py_ssize_t n = cx.shape[0], i, a, b
    bins_arr = np.zeros((nx, ny))
    gx_arr = np.zeros(n)
    gy_arr = np.zeros(n)
    cdef double[:, ::1] bins = bins_arr
    cdef double[::1] gx = gx_arr, gy = gy_arr
    cdef Py_ssize_t[:, ::1] jx = np.zeros((n, 2), dtype=np.intp), jy = np.zeros((n, 2), dtype=np.intp)
    cdef double[:, ::1] px = np.zeros((n, SUP)), dpx = np.zeros((n, SUP))
    cdef double[:, ::1] py = np.zeros((n, SUP)), dpy = np.zeros((n, SUP))
    cdef double dens = 0, r, sx, sy
    with nogil:
        for i in range(n):
            # Support can exceed SUP only for cx outside the board; bins there are absent anyway.
            _support(cx[i], bw, nx, &jx[i, 0], &jx[i, 1], &px[i, 0], &dpx[i, 0])
            _support(cy[i], bh, ny, &jy[i, 0], &jy[i, 1], &py[i, 0], &dpy[i, 0])
            for a in range(jx[i, 1]):
                for b in range(jy[i, 1]):
                    bins[jx[i, 0] + a, jy[i, 0] + b] += area[i] * px[i, a] * py[i, b]
        for a in range(nx):
            for b in range(ny):
                bins[a, b] -= target
                dens += bins[a, b] * bins[a, b]
        for i in range(n):
            sx = 0
            sy = 0
            for a in range(jx[i, 1]):
                for b in range(jy[i, 1]):
                    r = bins[jx[i, 0] + a, jy[i, 0] + b]
                    sx += dpx[i, a] * r * py[i, b]
                    sy += px[i, a] * r * dpy[i, b]
            gx[i] = 2.0 * area[i] * sx
            gy[i] = 2.0 * area[i] * sy
        for a in range(nx):
            for b in range(ny):
                bins[a, b] += target
    return dens, bins_arr, gx_arr, gy_arr


# ---------------------------------------------------------------------------
# convex hulls

cdef inline double _cross(double ox, double oy, double ax, double ay, double bx, double by) noexcept nogil:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


cdef Py_ssize_t _hull(double[:, ::1] pins, Py_ssize_t lo, Py_ssize_t hi, double* out) noexcept nogil:
    """Write CCW hull vertices of pins[lo:hi] into out (x, y interleaved,
    room for 2*(hi-lo)+2 points); return the vertex count."""
    cdef Py_ssize_t k = hi - lo, i, j, m = 0, t
    cdef double* s = <double*>malloc(2 * k * sizeof(double))
    cdef double x, y
    for i in range(k):
        x = pins[lo + i, 0]
        y = pins[lo + i, 1]
        j = i
        while j > 0 and (s[2 * j - 2] > x or (s[2 * j - 2] == x and s[2 * j - 1] > y)):
            s[2 * j] = s[2 * j - 2]
            s[2 * j + 1] = s[2 * j - 1]
            j -= 1
        s[2 * j] = x
        s[2 * j + 1] = y
    # dedupe exact duplicates
    j = 0
    for i in range(k):
        if j == 0 or s[2 * i] != s[2 * j - 2] or s[2 * i + 1] != s[2 * j - 1]:
            s[2 * j] = s[2 * i]
            s[2 * j + 1] = s[2 * i + 1]
            j += 1
    k = j
    if k <= 2:
        for i in range(2 * k):
            out[i] = s[i]
        free(s)
        return k
    for i in range(k):
        while m >= 2 and _cross(out[2 * m - 4], out[2 * m - 3], out[2 * m - 2], out[2 * m - 1],
                                s[2 * i], s[2 * i + 1]) <= 0.0:
            m -= 1
        out[2 * m] = s[2 * i]
        out[2 * m + 1] = s[2 * i + 1]
        m += 1
    t = m
    i = k - 2
    while i >= 0:
        while m > t and _cross(out[2 * m - 4], out[2 * m - 3], out[2 * m - 2], out[2 * m - 1],
                               s[2 * i], s[2 * i + 1]) <= 0.0:
            m -= 1
        out[2 * m] = s[2 * i]
        out[2 * m + 1] = s[2 * i + 1]
        m += 1
        i -= 1
    free(s)
    return m - 1


def hull(points):
    cdef double[:, ::1] p = np.ascontiguousarray(points, dtype=float).reshape(-1, 2)
    out = np.zeros(2 * p.shape[0] + 4)
    cdef double[::1] o = out
    cdef Py_ssize_t m = _hull(p, 0, p.shape[0], &o[0])
    return out[:2 * m].reshape(-1, 2).copy()


# ---------------------------------------------------------------------------
# separator

cdef inline double _seg_closest(double px, double py, double ax, double ay, double bx, double by,
                                double* qx, double* qy) noexcept nogil:
    cdef double abx = bx - ax, aby = by - ay, L = abx * abx + aby * aby, t = 0
    if L > 0:
        t = ((px - ax) * abx + (py - ay) * aby) / L
        if t < 0:
            t = 0
        elif t > 1:
            t = 1
    qx[0] = ax + t * abx
    qy[0] = ay + t * aby
    return (px - qx[0]) * (px - qx[0]) + (py - qy[0]) * (py - qy[0])


cdef void _closest_pair(double* ha, Py_ssize_t na, double* hb, Py_ssize_t nb, double* best,
                        double* p, double* q, bint flip) noexcept nogil:
    cdef Py_ssize_t i, j, ne
    cdef double qx, qy, d, ax, ay, bx, by
    ne = 1 if nb <= 2 else nb
    for i in range(na):
        for j in range(ne):
            ax = hb[2 * j]
            ay = hb[2 * j + 1]
            if nb == 1:
                bx = ax
                by = ay
            else:
                bx = hb[2 * ((j + 1) % nb)]
                by = hb[2 * ((j + 1) % nb) + 1]
            d = _seg_closest(ha[2 * i], ha[2 * i + 1], ax, ay, bx, by, &qx, &qy)
            if d < best[0]:
                best[0] = d
                if flip:
                    p[0] = qx
                    p[1] = qy
                    q[0] = ha[2 * i]
                    q[1] = ha[2 * i + 1]
                else:
                    p[0] = ha[2 * i]
                    p[1] = ha[2 * i + 1]
                    q[0] = qx
                    q[1] = qy


cdef bint _max_margin(double[:, ::1] pins, Py_ssize_t alo, Py_ssize_t ahi, Py_ssize_t blo, Py_ssize_t bhi,
                      double* ha, Py_ssize_t na, double* hb, Py_ssize_t nb, double* th) noexcept nogil:
    cdef double best = INFINITY, wx, wy, lim, amax = 0, v, pw, qw
    cdef double p[2]
    cdef double q[2]
    cdef Py_ssize_t i
    _closest_pair(ha, na, hb, nb, &best, p, q, False)
    _closest_pair(hb, nb, ha, na, &best, p, q, True)
    if not best > 1e-24:
        return False
    wx = p[0] - q[0]
    wy = p[1] - q[1]
    for i in range(alo, ahi):
        amax = max(amax, max(fabs(pins[i, 0]), fabs(pins[i, 1])))
    for i in range(blo, bhi):
        amax = max(amax, max(fabs(pins[i, 0]), fabs(pins[i, 1])))
    lim = SEP_TOL * (1.0 + amax) * sqrt(best)
    pw = p[0] * wx + p[1] * wy
    qw = q[0] * wx + q[1] * wy
    for i in range(alo, ahi):
        if pins[i, 0] * wx + pins[i, 1] * wy < pw - lim:
            return False
    for i in range(blo, bhi):
        if pins[i, 0] * wx + pins[i, 1] * wy > qw + lim:
            return False
    th[0] = 2.0 * wx / best
    th[1] = 2.0 * wy / best
    th[2] = th[0] * (p[0] + q[0]) / 2.0 + th[1] * (p[1] + q[1]) / 2.0
    return True


cdef double _residual(double[:, ::1] pins, Py_ssize_t alo, Py_ssize_t ahi, Py_ssize_t blo, Py_ssize_t bhi,
                      double* th) noexcept nogil:
    cdef double s1 = 0, s2 = 0, z
    cdef Py_ssize_t i
    for i in range(alo, ahi):
        z = th[2] + 1.0 - pins[i, 0] * th[0] - pins[i, 1] * th[1]
        if z > 0:
            s1 += z * z
    for i in range(blo, bhi):
        z = pins[i, 0] * th[0] + pins[i, 1] * th[1] - th[2] + 1.0
        if z > 0:
            s2 += z * z
    return sqrt(s1) + sqrt(s2)


cdef double _smoothed(double[:, ::1] pins, Py_ssize_t alo, Py_ssize_t ahi, Py_ssize_t blo, Py_ssize_t bhi,
                      double* th, double eps, double* grad, double* hess, bint want) noexcept nogil:
    cdef double val = 0, z, s, sg
    cdef double m[3]
    cdef double g[3]
    cdef double h[9]
    cdef Py_ssize_t i, a, b, side, lo, hi
    if want:
        for a in range(3):
            grad[a] = 0
        for a in range(9):
            hess[a] = 0
    for side in range(2):
        lo = alo if side == 0 else blo
        hi = ahi if side == 0 else bhi
        s = 0
        for a in range(3):
            g[a] = 0
        for a in range(9):
            h[a] = 0
        for i in range(lo, hi):
            if side == 0:
                m[0] = -pins[i, 0]
                m[1] = -pins[i, 1]
                m[2] = 1.0
            else:
                m[0] = pins[i, 0]
                m[1] = pins[i, 1]
                m[2] = -1.0
            z = m[0] * th[0] + m[1] * th[1] + m[2] * th[2] + 1.0
            if z > 0:
                s += z * z
                if want:
                    for a in range(3):
                        g[a] += z * m[a]
                        for b in range(3):
                            h[3 * a + b] += m[a] * m[b]
        sg = sqrt(s + eps * eps)
        val += sg
        if want:
            for a in range(3):
                g[a] /= sg
            for a in range(3):
                grad[a] += g[a]
                for b in range(3):
                    hess[3 * a + b] += h[3 * a + b] / sg - g[a] * g[b] / sg
    return val


cdef bint _solve3(double* H, double* rhs, double* x) noexcept nogil:
    """Cholesky solve of a 3x3 SPD system."""
    cdef double l00, l10, l11, l20, l21, l22, y0, y1, y2, t
    t = H[0]
    if t <= 0:
        return False
    l00 = sqrt(t)
    l10 = H[3] / l00
    l20 = H[6] / l00
    t = H[4] - l10 * l10
    if t <= 0:
        return False
    l11 = sqrt(t)
    l21 = (H[7] - l20 * l10) / l11
    t = H[8] - l20 * l20 - l21 * l21
    if t <= 0:
        return False
    l22 = sqrt(t)
    y0 = rhs[0] / l00
    y1 = (rhs[1] - l10 * y0) / l11
    y2 = (rhs[2] - l20 * y0 - l21 * y1) / l22
    x[2] = y2 / l22
    x[1] = (y1 - l21 * x[2]) / l11
    x[0] = (y0 - l10 * x[1] - l20 * x[2]) / l00
    return True


cdef double _newton(double[:, ::1] pins, Py_ssize_t alo, Py_ssize_t ahi, Py_ssize_t blo, Py_ssize_t bhi,
                    double* th) noexcept nogil:
    cdef double grad[3]
    cdef double hess[9]
    cdef double step[3]
    cdef double rhs[3]
    cdef double trial[3]
    cdef double val, mu, dec, t, nv, eps
    cdef int stage, it, a
    cdef bint moved
    for stage in range(3):
        eps = EPS_SCHEDULE[stage]
        for it in range(NEWTON_ITERS):
            val = _smoothed(pins, alo, ahi, blo, bhi, th, eps, grad, hess, True)
            mu = 1e-12 * (1.0 + hess[0] + hess[4] + hess[8])
            hess[0] += mu
            hess[4] += mu
            hess[8] += mu
            for a in range(3):
                rhs[a] = -grad[a]
            if not _solve3(hess, rhs, step):
                for a in range(3):
                    step[a] = -grad[a]
            dec = grad[0] * step[0] + grad[1] * step[1] + grad[2] * step[2]
            if dec >= 0:
                for a in range(3):
                    step[a] = -grad[a]
                dec = -(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2])
            if -dec < 1e-20:
                break
            t = 1.0
            moved = False
            while t > 1e-12:
                for a in range(3):
                    trial[a] = th[a] + t * step[a]
                nv = _smoothed(pins, alo, ahi, blo, bhi, trial, eps, grad, hess, False)
                if nv <= val + 1e-4 * t * dec:
                    moved = True
                    break
                t *= 0.5
            if not moved:
                break
            for a in range(3):
                th[a] = trial[a]
            if fabs(t * dec) < 1e-16 * (1.0 + val):
                break
    return _residual(pins, alo, ahi, blo, bhi, th)


cdef double _solve_pair(double[:, ::1] pins, Py_ssize_t alo, Py_ssize_t ahi, Py_ssize_t blo, Py_ssize_t bhi,
                        double* ha, Py_ssize_t na, double* hb, Py_ssize_t nb,
                        double* th, bint warm, double prev_f) noexcept nogil:
    cdef double best_f = INFINITY, f, cax = 0, cay = 0, cbx = 0, cby = 0, nd, cx, cy, spread
    cdef double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY
    cdef double dirs[16]
    cdef double cand[3]
    cdef double best[3]
    cdef Py_ssize_t i, s
    if _max_margin(pins, alo, ahi, blo, bhi, ha, na, hb, nb, th):
        return _residual(pins, alo, ahi, blo, bhi, th)
    if warm:
        for i in range(3):
            cand[i] = th[i]
        best_f = _newton(pins, alo, ahi, blo, bhi, cand)
        for i in range(3):
            best[i] = cand[i]
        if best_f <= 1.1 * prev_f:
            for i in range(3):
                th[i] = best[i]
            return best_f
    for i in range(alo, ahi):
        cax += pins[i, 0]
        cay += pins[i, 1]
    for i in range(blo, bhi):
        cbx += pins[i, 0]
        cby += pins[i, 1]
    cax /= (ahi - alo)
    cay /= (ahi - alo)
    cbx /= (bhi - blo)
    cby /= (bhi - blo)
    for s in range(2):
        for i in range(alo if s == 0 else blo, ahi if s == 0 else bhi):
            xmin = min(xmin, pins[i, 0])
            xmax = max(xmax, pins[i, 0])
            ymin = min(ymin, pins[i, 1])
            ymax = max(ymax, pins[i, 1])
    spread = max(xmax - xmin, ymax - ymin)
    if spread <= 0:
        spread = 1.0
    nd = sqrt((cax - cbx) * (cax - cbx) + (cay - cby) * (cay - cby))
    if nd > 1e-12:
        cx = (cax - cbx) / nd
        cy = (cay - cby) / nd
    else:
        cx = 1.0
        cy = 0.0
    dirs[0] = 1; dirs[1] = 0
    dirs[2] = -1; dirs[3] = 0
    dirs[4] = 0; dirs[5] = 1
    dirs[6] = 0; dirs[7] = -1
    dirs[8] = cx; dirs[9] = cy
    dirs[10] = -cx; dirs[11] = -cy
    dirs[12] = -cy; dirs[13] = cx
    dirs[14] = cy; dirs[15] = -cx
    for s in range(8):
        cand[0] = dirs[2 * s] / spread
        cand[1] = dirs[2 * s + 1] / spread
        cand[2] = cand[0] * (cax + cbx) / 2.0 + cand[1] * (cay + cby) / 2.0
        f = _newton(pins, alo, ahi, blo, bhi, cand)
        if f < best_f:
            best_f = f
            for i in range(3):
                best[i] = cand[i]
    # The cone apex u = 0 is where smoothed Newton stalls; test it exactly.
    for s in range(2):
        cand[0] = 0
        cand[1] = 0
        cand[2] = -1.0 if s == 0 else 1.0
        f = _residual(pins, alo, ahi, blo, bhi, cand)
        if f < best_f:
            best_f = f
            for i in range(3):
                best[i] = cand[i]
    for i in range(3):
        th[i] = best[i]
    return best_f


def solve_separator(A, B, warm=None, prev_f=None, ha=None, hb=None):
    A = np.ascontiguousarray(A, dtype=float).reshape(-1, 2)
    B = np.ascontiguousarray(B, dtype=float).reshape(-1, 2)
    cdef double[:, ::1] pins = np.vstack([A, B])
    cdef Py_ssize_t na = A.shape[0], nb = B.shape[0], ka, kb
    hbuf = np.zeros(2 * (na + nb) + 8)
    cdef double[::1] h = hbuf
    cdef double th[3]
    ka = _hull(pins, 0, na, &h[0])
    kb = _hull(pins, na, na + nb, &h[2 * na + 4])
    cdef bint w = warm is not None
    if w:
        th[0], th[1], th[2] = warm
    f = _solve_pair(pins, 0, na, na, na + nb, &h[0], ka, &h[2 * na + 4], kb, th, w,
                    prev_f if prev_f is not None else INFINITY)
    return np.array([th[0], th[1]]), th[2], f


def net_hulls(pins, net_ptr):
    return [hull(pins[net_ptr[e]:net_ptr[e + 1]]) for e in range(len(net_ptr) - 1)]


def solve_pairs(double[:, ::1] pins, Py_ssize_t[::1] net_ptr, Py_ssize_t[:, ::1] pairs,
                double[:, ::1] U, double[::1] G, double[::1] F, unsigned char[::1] warm,
                Py_ssize_t lo=0, hi=None):
    cdef Py_ssize_t m = net_ptr.shape[0] - 1, e, f, k, top = pairs.shape[0] if hi is None else hi
    cdef Py_ssize_t npins = pins.shape[0]
    hull_ptr_arr = np.zeros(m + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] hull_ptr = hull_ptr_arr
    hull_cnt_arr = np.zeros(m, dtype=np.intp)
    cdef Py_ssize_t[::1] hull_cnt = hull_cnt_arr
    for e in range(m):
        hull_ptr[e + 1] = hull_ptr[e] + 2 * (net_ptr[e + 1] - net_ptr[e]) + 4
    hb_arr = np.zeros(hull_ptr[m] + 1)
    cdef double[::1] hb = hb_arr
    need_arr = np.zeros(m, dtype=np.uint8)
    cdef unsigned char[::1] need = need_arr
    cdef double th[3]
    for k in range(lo, top):
        need[pairs[k, 0]] = 1
        need[pairs[k, 1]] = 1
    with nogil:
        for e in range(m):
            if need[e] and net_ptr[e + 1] > net_ptr[e]:
                hull_cnt[e] = _hull(pins, net_ptr[e], net_ptr[e + 1], &hb[hull_ptr[e]])
        for k in range(lo, top):
            e = pairs[k, 0]
            f = pairs[k, 1]
            th[0] = U[k, 0]
            th[1] = U[k, 1]
            th[2] = G[k]
            F[k] = _solve_pair(pins, net_ptr[e], net_ptr[e + 1], net_ptr[f], net_ptr[f + 1],
                               &hb[hull_ptr[e]], hull_cnt[e], &hb[hull_ptr[f]], hull_cnt[f],
                               th, warm[k], F[k] if warm[k] else INFINITY)
            U[k, 0] = th[0]
            U[k, 1] = th[1]
            G[k] = th[2]
            warm[k] = True


def ns_pin_grad(double[:, ::1] pins, Py_ssize_t[::1] net_ptr, Py_ssize_t[:, ::1] pairs,
                double[:, ::1] U, double[::1] G, double scale, double[:, ::1] out):
    cdef Py_ssize_t k, i, e, f
    cdef double r, ux, uy, g
    with nogil:
        for k in range(pairs.shape[0]):
            e = pairs[k, 0]
            f = pairs[k, 1]
            ux = U[k, 0]
            uy = U[k, 1]
            g = G[k]
            for i in range(net_ptr[e], net_ptr[e + 1]):
                r = g + 1.0 - pins[i, 0] * ux - pins[i, 1] * uy
                if r > 0:
                    out[i, 0] -= scale * 2.0 * r * ux
                    out[i, 1] -= scale * 2.0 * r * uy
            for i in range(net_ptr[f], net_ptr[f + 1]):
                r = pins[i, 0] * ux + pins[i, 1] * uy - g + 1.0
                if r > 0:
                    out[i, 0] += scale * 2.0 * r * ux
                    out[i, 1] += scale * 2.0 * r * uy
