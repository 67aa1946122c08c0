"""Synthetic design generator (seeded)."""
from __future__ import annotations

import numpy as np

from .design import Board, Component, Design, DesignError, Net, PinDef


def generate_design(n_components, n_nets, width, height, seed=0, utilization=0.5,
                    dim_range=(1.0, 10.0), n_fixed=0, pins_range=(2, 6), layers=2):
    """Random rectangles with perimeter pins and preferential-attachment nets.

    Footprint sides are log-uniform in ``dim_range`` before a common rescale
    that makes total area equal ``utilization`` times the board area.
    """
    if n_components < 1 or n_nets < 0:
        raise ValueError("need at least one component and a nonnegative net count")
    if not 0 < utilization <= 1:
        raise ValueError("utilization must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    lo, hi = np.log(dim_range[0]), np.log(dim_range[1])
    wh = np.exp(rng.uniform(lo, hi, size=(n_components, 2)))
    wh *= np.sqrt(utilization * width * height / np.prod(wh, axis=1).sum())
    wh = np.maximum(np.round(wh, 2), 0.01)
    if (wh[:, 0] > width).any() or (wh[:, 1] > height).any():
        raise DesignError("cannot satisfy the utilization cap: a footprint exceeds the board")

    pins = [[] for _ in range(n_components)]

    def new_pin(i):
        w, h = wh[i]
        side = rng.integers(4)
        t = rng.uniform()
        ox, oy = [(t * w, 0.0), (w, t * h), (t * w, h), (0.0, t * h)][side]
        pid = str(len(pins[i]) + 1)
        pins[i].append(PinDef(pid, float(min(round(ox, 2), w)), float(min(round(oy, 2), h))))
        return pid

    degree = np.zeros(n_components)
    nets = []
    kmin, kmax = pins_range
    for e in range(n_nets):
        k = int(min(rng.integers(kmin, kmax + 1), n_components))
        if k < 2 and n_components >= 2:
            k = 2
        weights = degree + 1.0
        chosen = rng.choice(n_components, size=k, replace=False, p=weights / weights.sum())
        refs = []
        for i in sorted(int(c) for c in chosen):
            refs.append((f"C{i + 1}", new_pin(i)))
            degree[i] += 1
        nets.append(Net(f"N{e + 1}", tuple(refs)))

    fixed = {}
    placed = []
    for i in range(min(n_fixed, n_components)):
        w, h = wh[i]
        for _ in range(1000):
            x = round(float(rng.uniform(0, width - w)), 2)
            y = round(float(rng.uniform(0, height - h)), 2)
            if all(x + w <= a or a + b <= x or y + h <= c or c + d <= y for a, c, b, d in placed):
                break
        else:
            raise DesignError("could not place fixed components without overlap")
        placed.append((x, y, w, h))
        fixed[i] = (x, y, 0)

    comps = tuple(
        Component(f"C{i + 1}", float(wh[i, 0]), float(wh[i, 1]), i in fixed, fixed.get(i), tuple(pins[i]))
        for i in range(n_components))
    return Design(Board(float(width), float(height), layers), comps, tuple(nets))
