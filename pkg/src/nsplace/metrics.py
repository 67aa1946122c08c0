"""Placement quality metrics and the text/CSV report."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .design import LATTICE, effective_dims, pin_positions, to_lattice
from .geometry import segments_intersect
from .separation import ns_cost


def hpwl_per_net(design, placement):
    pins = pin_positions(design, placement)
    _, _, ptr = design.pin_table()
    out = np.zeros(len(design.nets))
    for e in range(len(design.nets)):
        p = pins[ptr[e]:ptr[e + 1]]
        if len(p):
            out[e] = (p[:, 0].max() - p[:, 0].min()) + (p[:, 1].max() - p[:, 1].min())
    return out


def hpwl_total(design, placement):
    """Sum over nets of the pin bounding-box half perimeter."""
    return math.fsum(hpwl_per_net(design, placement))


def ns_objective(design, placement, pairs=None):
    """Pair-averaged separation residual from fresh solves."""
    return ns_cost(design, placement, pairs)


def star_segments(design, placement):
    """``(net index, (centroid, pin))`` for every pin of every net."""
    pins = pin_positions(design, placement)
    _, _, ptr = design.pin_table()
    segs = []
    for e in range(len(design.nets)):
        p = pins[ptr[e]:ptr[e + 1]]
        if not len(p):
            continue
        c = (float(p[:, 0].mean()), float(p[:, 1].mean()))
        segs.extend((e, (c, (float(a), float(b)))) for a, b in p)
    return segs


def crossing_count(design, placement):
    """Intersecting star-segment pairs from different nets.

    Candidate pairs are found by bounding-box overlap in one vectorized pass;
    only those reach the exact segment predicate.
    """
    segs = star_segments(design, placement)
    if len(segs) < 2:
        return 0
    net = np.array([s[0] for s in segs])
    pts = np.array([[s[1][0][0], s[1][0][1], s[1][1][0], s[1][1][1]] for s in segs])
    lo = np.minimum(pts[:, :2], pts[:, 2:]) - 1e-9
    hi = np.maximum(pts[:, :2], pts[:, 2:]) + 1e-9
    order = np.argsort(lo[:, 0], kind="stable")
    count = 0
    for a_pos, a in enumerate(order):
        rest = order[a_pos + 1:]
        rest = rest[lo[rest, 0] <= hi[a, 0]]
        rest = rest[(net[rest] != net[a]) & (lo[rest, 1] <= hi[a, 1]) & (hi[rest, 1] >= lo[a, 1])]
        for b in rest:
            if segments_intersect(segs[a][1], segs[b][1]):
                count += 1
    return count


def _lattice_rects(design, placement):
    eff = to_lattice(effective_dims(design, placement.r))
    x0, y0 = to_lattice(placement.x), to_lattice(placement.y)
    return x0, y0, x0 + eff[:, 0], y0 + eff[:, 1]


def overlap_violations(design, placement):
    """``(pairs with positive overlap area, total overlap area)``.

    Rectangles are intersected on the 1 nm lattice, so abutting parts never
    count as overlapping through rounding noise.
    """
    x0, y0, x1, y1 = _lattice_rects(design, placement)
    count, area = 0, []
    for i in range(design.n):
        ox = np.minimum(x1[i], x1[i + 1:]) - np.maximum(x0[i], x0[i + 1:])
        oy = np.minimum(y1[i], y1[i + 1:]) - np.maximum(y0[i], y0[i + 1:])
        hit = (ox > 0) & (oy > 0)
        count += int(np.count_nonzero(hit))
        area.extend((ox[hit] / LATTICE * (oy[hit] / LATTICE)).tolist())
    return count, math.fsum(area)


def out_of_bounds(design, placement):
    """Ids of components not fully inside the board."""
    x0, y0, x1, y1 = _lattice_rects(design, placement)
    W, H = to_lattice([design.board.width, design.board.height])
    bad = (x0 < 0) | (y0 < 0) | (x1 > W) | (y1 > H)
    return [design.components[i].id for i in np.flatnonzero(bad)]


@dataclass
class MetricsReport:
    hpwl_total: float
    ns_objective: float
    crossing_count: int
    overlap_count: int
    overlap_area: float
    runtime_s: dict = field(default_factory=dict)

    def rows(self):
        out = [("hpwl_total", self.hpwl_total), ("ns_objective", self.ns_objective),
               ("crossing_count", self.crossing_count), ("overlap_count", self.overlap_count),
               ("overlap_area", self.overlap_area)]
        out += [(f"runtime_{k}", v) for k, v in self.runtime_s.items()]
        return out

    def to_csv(self, baseline=None):
        """``metric,value`` rows, plus an ``improvement_pct`` column when a
        baseline report is given."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        base = dict(baseline.rows()) if baseline is not None else None
        w.writerow(["metric", "value"] + (["improvement_pct"] if base is not None else []))
        for k, v in self.rows():
            row = [k, repr(v) if isinstance(v, float) else str(v)]
            if base is not None:
                imp = percent_improvement(base[k], v) if k in base else None
                row.append("" if imp is None else repr(imp))
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        vals = {}
        for row in csv.DictReader(io.StringIO(text)):
            vals[row["metric"]] = row["value"]
        runtime = {k[len("runtime_"):]: float(v) for k, v in vals.items() if k.startswith("runtime_")}
        return cls(float(vals["hpwl_total"]), float(vals["ns_objective"]),
                   int(vals["crossing_count"]), int(vals["overlap_count"]),
                   float(vals["overlap_area"]), runtime)

    def table(self, baseline=None):
        """Aligned text table, with the percent improvement against
        ``baseline`` in parentheses."""
        base = dict(baseline.rows()) if baseline is not None else {}
        lines = []
        for k, v in self.rows():
            val = f"{v:.6g}" if isinstance(v, float) else str(v)
            if k in base:
                imp = percent_improvement(base[k], v)
                if imp is not None:
                    val += f" ({imp:+.1f}%)"
            lines.append((k, val))
        width = max(len(k) for k, _ in lines)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in lines) + "\n"


def percent_improvement(base, new):
    """``100 (base - new) / base``; ``None`` when the baseline is zero."""
    base, new = float(base), float(new)
    if base == 0:
        return None
    return 100.0 * (base - new) / base


def report(design, placement, timings=None, baseline=None):
    """All metrics for one placement; returns ``(MetricsReport, table text)``."""
    count, area = overlap_violations(design, placement)
    rep = MetricsReport(hpwl_total(design, placement), ns_objective(design, placement),
                        crossing_count(design, placement), count, area, dict(timings or {}))
    return rep, rep.table(baseline)


__all__ = ["MetricsReport", "hpwl_total", "hpwl_per_net", "ns_objective", "crossing_count",
           "overlap_violations", "out_of_bounds", "percent_improvement", "report", "star_segments"]
