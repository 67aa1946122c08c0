"""Max-margin net separation.

For a pair of nets ``(e, e')`` the residual

    f(u, gamma) = ||(gamma + 1 - A_e u)_+|| + ||(A_e' u - gamma + 1)_+||

is zero exactly when a line ``x.u = gamma`` separates the two pin hulls with
unit margin on each side; ``e`` takes the positive side.  The placement
objective sums the minimized residual over a set of net pairs; the reported
metric is its pair average.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .design import pin_positions

_threads = None


def set_threads(n):
    global _threads
    _threads = None if n is None else max(1, int(n))


def get_threads():
    if _threads is not None:
        return _threads
    env = os.environ.get("NSPLACE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Separator:
    u: np.ndarray
    gamma: float
    f: float


@dataclass(frozen=True)
class PairSet:
    pairs: np.ndarray  # (M, 2) net indices, i < j

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return (tuple(p) for p in self.pairs.tolist())


def pin_matrices(design, placement):
    pins = pin_positions(design, placement)
    _, _, ptr = design.pin_table()
    return [pins[ptr[e]:ptr[e + 1]] for e in range(len(design.nets))]


def pair_set(design, placement=None, radius=None):
    """Unordered distinct net pairs, optionally only those whose pin bounding
    boxes inflated by ``radius`` intersect."""
    m = len(design.nets)
    ii, jj = np.triu_indices(m, k=1)
    if radius is not None and np.isfinite(radius):
        if placement is None:
            raise ValueError("a placement is needed to filter pairs by distance")
        mats = pin_matrices(design, placement)
        lo = np.array([a.min(axis=0) for a in mats]).reshape(-1, 2) - radius
        hi = np.array([a.max(axis=0) for a in mats]).reshape(-1, 2) + radius
        keep = np.all((lo[ii] <= hi[jj]) & (lo[jj] <= hi[ii]), axis=1)
        ii, jj = ii[keep], jj[keep]
    return PairSet(np.column_stack([ii, jj]).astype(np.intp).reshape(-1, 2))


def solve_separator(A_e, A_f, warm=None):
    """Separator for one pair.  ``warm`` may be a previous :class:`Separator`."""
    A_e = np.asarray(A_e, dtype=float).reshape(-1, 2)
    A_f = np.asarray(A_f, dtype=float).reshape(-1, 2)
    if len(A_e) == 0 and len(A_f) == 0:
        raise ValueError("both nets are empty")
    if len(A_e) == 0 or len(A_f) == 0:
        # An empty side imposes nothing; u = 0 with gamma = -1 (or +1) zeroes the other.
        return Separator(np.zeros(2), -1.0 if len(A_e) else 1.0, 0.0)
    k = kernels.get()
    w = prev = None
    if warm is not None:
        w = (warm.u[0], warm.u[1], warm.gamma)
        prev = warm.f
    u, g, f = k.solve_separator(A_e, A_f, w, prev)
    return Separator(np.asarray(u, dtype=float), float(g), float(f))


def ns_gradient(A_e, A_f, sep):
    """Squared-hinge pin gradients ``(grad_e, grad_f)`` with ``sep`` frozen."""
    A_e = np.asarray(A_e, dtype=float).reshape(-1, 2)
    A_f = np.asarray(A_f, dtype=float).reshape(-1, 2)
    u, g = np.asarray(sep.u, dtype=float), sep.gamma
    re = np.maximum(0.0, g + 1.0 - A_e @ u)
    rf = np.maximum(0.0, A_f @ u - g + 1.0)
    return -2.0 * re[:, None] * u[None, :], 2.0 * rf[:, None] * u[None, :]


class SeparatorCache:
    """Per-pair separator state for repeated solves over a moving placement.

    Each slot keeps ``(u, gamma, f)`` from the last solve as a warm start.
    Pairs are solved in contiguous chunks on a thread pool; every slot is
    written by exactly one task and reductions run in pair order, so results
    do not depend on the thread count.
    """

    def __init__(self, pairs, backend=None):
        self.pairs = np.ascontiguousarray(pairs.pairs if isinstance(pairs, PairSet) else pairs,
                                          dtype=np.intp).reshape(-1, 2)
        M = len(self.pairs)
        self.U = np.zeros((M, 2))
        self.G = np.zeros(M)
        self.F = np.zeros(M)
        self.warm = np.zeros(M, dtype=bool)
        self.kernel = kernels.get(backend)
        self.solves = 0

    def __len__(self):
        return len(self.pairs)

    def reset(self):
        self.warm[:] = False

    def solve(self, pins, net_ptr):
        M = len(self.pairs)
        if M == 0:
            return
        pins = np.ascontiguousarray(pins, dtype=float)
        net_ptr = np.ascontiguousarray(net_ptr, dtype=np.intp)
        nt = min(get_threads(), M)
        if nt <= 1 or M < 64:
            kernels.solve_pairs(self.kernel, pins, net_ptr, self.pairs, self.U, self.G, self.F, self.warm)
        else:
            bounds = np.linspace(0, M, nt + 1).astype(int)
            with ThreadPoolExecutor(nt) as pool:
                futs = [pool.submit(kernels.solve_pairs, self.kernel, pins, net_ptr, self.pairs,
                                    self.U, self.G, self.F, self.warm, int(lo), int(hi))
                        for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
                for fut in futs:
                    fut.result()
        self.solves += M

    def total(self):
        """Residual summed over pairs in pair order."""
        return float(np.sum(self.F))

    def value(self):
        """Mean residual over pairs (0 when there are none)."""
        if len(self.F) == 0:
            return 0.0
        return float(np.sum(self.F) / len(self.F))

    def pin_gradient(self, pins, net_ptr, scale, out):
        if len(self.pairs):
            self.kernel.ns_pin_grad(np.ascontiguousarray(pins, dtype=float),
                                    np.ascontiguousarray(net_ptr, dtype=np.intp),
                                    self.pairs, self.U, self.G, float(scale), out)

    def separator(self, k):
        return Separator(self.U[k].copy(), float(self.G[k]), float(self.F[k]))


def ns_cost(design, placement, pairs=None, reduce="mean"):
    """Minimized residual over ``pairs`` solved from scratch, averaged
    (``reduce="mean"``) or summed (``reduce="sum"``)."""
    pairs = pair_set(design) if pairs is None else pairs
    cache = SeparatorCache(pairs)
    if len(cache) == 0:
        return 0.0
    pins = pin_positions(design, placement)
    _, _, ptr = design.pin_table()
    cache.solve(pins, ptr)
    if reduce == "sum":
        return cache.total()
    if reduce != "mean":
        raise ValueError(f"unknown reduction {reduce!r}")
    return cache.value()
