"""Planar primitives: convex hulls, hull/segment intersection, rectangle gaps.

All predicates use plain doubles with an absolute tolerance of ``EPS``.
"""
from __future__ import annotations

from dataclasses import dataclass

EPS = 1e-9


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    width: float
    height: float

    @property
    def x2(self):
        return self.x + self.width

    @property
    def y2(self):
        return self.y + self.height


def cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _orient(o, a, b):
    c = cross(o, a, b)
    if c > EPS:
        return 1
    if c < -EPS:
        return -1
    return 0


def convex_hull(points):
    """Counterclockwise hull vertices (monotone chain), collinear points dropped.

    Degenerate inputs give a one-vertex (point) or two-vertex (segment) hull.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if not pts:
        raise ValueError("convex_hull of an empty point set")
    if len(pts) <= 2:
        return pts

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross(out[-2], out[-1], p) <= 0.0:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return hull


def _on_segment(p, a, b):
    return (min(a[0], b[0]) - EPS <= p[0] <= max(a[0], b[0]) + EPS
            and min(a[1], b[1]) - EPS <= p[1] <= max(a[1], b[1]) + EPS)


def _closed_segments_meet(a, b, c, d):
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
        return True
    return ((o1 == 0 and _on_segment(c, a, b)) or (o2 == 0 and _on_segment(d, a, b))
            or (o3 == 0 and _on_segment(a, c, d)) or (o4 == 0 and _on_segment(b, c, d)))


def _same_point(p, q):
    return abs(p[0] - q[0]) <= EPS and abs(p[1] - q[1]) <= EPS


def segments_intersect(s1, s2):
    """True iff the closed segments share a point other than a lone common endpoint."""
    a, b = s1
    c, d = s2
    if not _closed_segments_meet(a, b, c, d):
        return False
    shared = [(p, q) for p in (a, b) for q in (c, d) if _same_point(p, q)]
    if not shared:
        return True
    # Collinear overlap extends past the shared endpoint; anything else is a touch.
    if _orient(a, b, c) == 0 and _orient(a, b, d) == 0:
        if _same_point(a, b) or _same_point(c, d):
            return False
        # Both segments leave p; they overlap iff they leave in the same direction.
        p = shared[0][0]
        u = b if _same_point(a, p) else a
        v = d if _same_point(c, p) else c
        dot = (u[0] - p[0]) * (v[0] - p[0]) + (u[1] - p[1]) * (v[1] - p[1])
        return dot > EPS
    return False


def point_in_hull(p, hull):
    """Closed containment test for a CCW convex hull (any degeneracy)."""
    if len(hull) == 1:
        return _same_point(p, hull[0])
    if len(hull) == 2:
        return _orient(hull[0], hull[1], p) == 0 and _on_segment(p, hull[0], hull[1])
    n = len(hull)
    return all(cross(hull[i], hull[(i + 1) % n], p) >= -EPS for i in range(n))


def _edges(hull):
    if len(hull) == 1:
        return [(hull[0], hull[0])]
    if len(hull) == 2:
        return [(hull[0], hull[1])]
    return [(hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull))]


def hulls_intersect(a, b):
    """True iff two closed convex hulls share any point (contact counts)."""
    for e in _edges(a):
        for f in _edges(b):
            if _closed_segments_meet(e[0], e[1], f[0], f[1]):
                return True
    return point_in_hull(a[0], b) or point_in_hull(b[0], a)


def rect_gap(a, b):
    """Signed boundary-to-boundary gaps ``(dx, dy)``; negative means the
    projections overlap by that depth."""
    dx = max(a.x, b.x) - min(a.x2, b.x2)
    dy = max(a.y, b.y) - min(a.y2, b.y2)
    return dx, dy
