"""Standalone SVG view of a placement."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .design import effective_dims
from .geometry import convex_hull
from .metrics import star_segments

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _num(v):
    return f"{v:.6g}"


def render_svg(design, placement, hulls=False, scale=10.0, labels=True):
    """SVG 1.1 text: board outline, one ``rect`` per component, star
    segments per net and, with ``hulls``, each net's pin hull when it has
    area.  Board y grows upward, so the drawing is flipped vertically."""
    W, H = design.board.width, design.board.height
    pad = 1.0
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_num((W + 2 * pad) * scale)}" height="{_num((H + 2 * pad) * scale)}" '
        f'viewBox="{_num(-pad)} {_num(-pad)} {_num(W + 2 * pad)} {_num(H + 2 * pad)}">',
        f'<g transform="translate(0 {_num(H)}) scale(1 -1)">',
        f'<polygon class="board" points="0,0 {_num(W)},0 {_num(W)},{_num(H)} 0,{_num(H)}" '
        f'fill="none" stroke="black" stroke-width="{_num(0.02 * max(W, H) / 10)}"/>',
    ]
    eff = effective_dims(design, placement.r)
    for i, c in enumerate(design.components):
        fill = "#bbbbbb" if c.fixed else "#dde6f0"
        out.append(f'<rect class="component" x="{_num(placement.x[i])}" y="{_num(placement.y[i])}" '
                   f'width="{_num(eff[i, 0])}" height="{_num(eff[i, 1])}" fill="{fill}" '
                   f'stroke="#333333" stroke-width="0.05"><title>{escape(c.id)}</title></rect>')
    segs = star_segments(design, placement)
    for e, ((ax, ay), (bx, by)) in segs:
        col = _PALETTE[e % len(_PALETTE)]
        out.append(f'<line class="net" x1="{_num(ax)}" y1="{_num(ay)}" x2="{_num(bx)}" '
                   f'y2="{_num(by)}" stroke="{col}" stroke-width="0.08"/>')
    if hulls:
        by_net = {}
        for e, (_, pin) in segs:
            by_net.setdefault(e, []).append(pin)
        for e, pts in by_net.items():
            h = convex_hull(pts)
            if len(h) >= 3:
                col = _PALETTE[e % len(_PALETTE)]
                pts_s = " ".join(f"{_num(x)},{_num(y)}" for x, y in h)
                out.append(f'<polygon class="hull" points="{pts_s}" fill="{col}" '
                           f'fill-opacity="0.15" stroke="{col}" stroke-width="0.04"/>')
    out.append("</g>")
    if labels:
        for i, c in enumerate(design.components):
            cx = placement.x[i] + eff[i, 0] / 2
            cy = H - (placement.y[i] + eff[i, 1] / 2)
            size = max(0.3, min(eff[i]) / 3)
            out.append(f'<text x="{_num(cx)}" y="{_num(cy)}" font-size="{_num(size)}" '
                       f'text-anchor="middle" dominant-baseline="middle">{escape(c.id)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
