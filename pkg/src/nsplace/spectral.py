"""Spectral seed placement and orientation search.

Components are embedded with the two lowest nontrivial eigenvectors of the
area-weighted normalized Laplacian of the clique-expanded netlist, subject
to an area-weighted zero-mean constraint.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .design import Placement, effective_dims

log = logging.getLogger(__name__)


class EigenSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class CliqueGraph:
    adjacency: np.ndarray
    areas: np.ndarray

    @property
    def n(self):
        return len(self.areas)

    @property
    def degrees(self):
        return self.adjacency.sum(axis=1)


@dataclass(frozen=True)
class SpectralConfig:
    c1: float | None = None
    c2: float | None = None
    c3: float = 0.0
    fill: float = 0.8
    tol: float = 1e-8
    max_iter: int = 10_000
    seed: int = 0

    def __post_init__(self):
        for v in (self.c1, self.c2):
            if v is not None and not v > 0:
                raise ValueError("scale constants c1, c2 must be positive")


def clique_expand(design):
    """Weight ``1/(k-1)`` on every pair of distinct components of a k-pin net."""
    n = design.n
    A = np.zeros((n, n))
    for net in design.nets:
        k = len(net.pins)
        if k < 2:
            continue
        comps = sorted({design.index(cid) for cid, _ in net.pins})
        w = 1.0 / (k - 1)
        for a in range(len(comps)):
            for b in range(a + 1, len(comps)):
                i, j = comps[a], comps[b]
                A[i, j] += w
                A[j, i] += w
    areas = np.array([c.area for c in design.components], dtype=float)
    return CliqueGraph(A, areas)


def normalized_laplacian(g):
    deg = g.degrees
    n = g.n
    L = np.eye(n)
    nz = deg > 0
    s = np.zeros(n)
    s[nz] = 1.0 / np.sqrt(deg[nz])
    L -= s[:, None] * g.adjacency * s[None, :]
    return L


def _lanczos_lowest(op, n, basis_out, q0, tol, max_iter):
    """Lowest eigenpair of symmetric ``op`` restricted to the complement of the
    orthonormal columns in ``basis_out``, by Lanczos with full
    reorthogonalization."""

    def project(v):
        if basis_out.shape[1]:
            v = v - basis_out @ (basis_out.T @ v)
        return v

    dim = n - basis_out.shape[1]
    if dim <= 0:
        raise EigenSolverError("no remaining subspace")
    q = project(q0)
    nq = np.linalg.norm(q)
    if nq < 1e-12:
        raise EigenSolverError("degenerate start vector")
    Q = [q / nq]
    alphas, betas = [], []
    theta = vec = None
    it = 0
    while it < max_iter:
        it += 1
        w = project(op(Q[-1]))
        a = float(Q[-1] @ w)
        alphas.append(a)
        Qm = np.array(Q).T
        w = w - Qm @ (Qm.T @ w)
        w = w - Qm @ (Qm.T @ w)
        w = project(w)
        b = float(np.linalg.norm(w))
        evals, evecs = eigh_tridiagonal(np.array(alphas), np.array(betas)) if len(alphas) > 1 else (
            np.array(alphas), np.ones((1, 1)))
        theta = float(evals[0])
        y = evecs[:, 0]
        vec = Qm @ y
        resid = abs(b * y[-1])
        scale = max(1.0, abs(theta))
        if resid <= tol * scale or len(Q) >= dim or b < 1e-14:
            vec /= np.linalg.norm(vec)
            true_res = np.linalg.norm(project(op(vec)) - theta * vec)
            if true_res <= max(tol * scale, 1e-10) or len(Q) >= dim:
                return theta, vec
            # Breakdown before convergence: restart from the current Ritz vector.
            Q = [vec]
            alphas, betas = [], []
            continue
        betas.append(b)
        Q.append(w / b)
    raise EigenSolverError(f"Lanczos did not converge in {max_iter} iterations")


def lowest_eigvecs(M, constraint, count, tol=1e-8, max_iter=10_000, seed=0):
    """``count`` lowest eigenpairs of symmetric ``M`` orthogonal to ``constraint``.

    Deflation: each pair is found in the complement of the constraint and of
    the eigenvectors already found.
    """
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    basis = (constraint / np.linalg.norm(constraint)).reshape(n, 1)
    vals, vecs = [], []
    for _ in range(count):
        theta, v = _lanczos_lowest(lambda z: M @ z, n, basis, rng.standard_normal(n), tol, max_iter)
        vals.append(theta)
        vecs.append(v)
        basis = np.column_stack([basis, v])
    return np.array(vals), np.column_stack(vecs)


def embed(design, cfg=SpectralConfig()):
    """Unscaled spectral coordinates ``(x, y)`` with ``v.x = v.y = 0``,
    ``x^T V x = c1`` and ``y^T V y = c2``."""
    g = clique_expand(design)
    n = g.n
    L = normalized_laplacian(g)
    v = g.areas
    s = 1.0 / np.sqrt(v)
    M = s[:, None] * L * s[None, :]
    M = (M + M.T) / 2
    _, Z = lowest_eigvecs(M, np.sqrt(v), 2, cfg.tol, cfg.max_iter, cfg.seed)
    X = s[:, None] * Z
    c1 = float(n) if cfg.c1 is None else cfg.c1
    c2 = float(n) if cfg.c2 is None else cfg.c2
    x = X[:, 0] * np.sqrt(c1 / (X[:, 0] @ (v * X[:, 0])))
    y = X[:, 1] * np.sqrt(c2 / (X[:, 1] @ (v * X[:, 1])))
    # Deterministic sign: largest-magnitude entry positive.
    for arr in (x, y):
        if arr[np.argmax(np.abs(arr))] < 0:
            arr *= -1
    return x, y


def _rescale(vals, lo, hi):
    span = vals.max() - vals.min()
    if span < 1e-12:
        return np.full_like(vals, (lo + hi) / 2)
    return lo + (vals - vals.min()) * (hi - lo) / span


def spectral_coordinates(design, cfg=SpectralConfig()):
    """Seed placement: spectral coordinates as component centers, rescaled so
    they span ``cfg.fill`` of the board around its center."""
    W, H = design.board.width, design.board.height
    n = design.n
    dims = design.dims()
    if n < 3:
        cx = np.full(n, W / 2)
        cy = np.full(n, H / 2)
    else:
        x, y = embed(design, cfg)
        m = (1 - cfg.fill) / 2
        cx = _rescale(x, m * W, (1 - m) * W)
        cy = _rescale(y, m * H, (1 - m) * H)
    px = np.clip(cx - dims[:, 0] / 2, 0, np.maximum(W - dims[:, 0], 0))
    py = np.clip(cy - dims[:, 1] / 2, 0, np.maximum(H - dims[:, 1], 0))
    return Placement(px, py, np.zeros(n, dtype=np.int8)).with_fixed(design)


def _set_orientation(design, p, i, r):
    """Rotate component ``i`` to ``r`` about its center, kept on the board."""
    if p.r[i] == r:
        return p
    q = p.copy()
    c = design.components[i]
    w0, h0 = (c.height, c.width) if p.r[i] else (c.width, c.height)
    w1, h1 = (c.height, c.width) if r else (c.width, c.height)
    cx, cy = p.x[i] + w0 / 2, p.y[i] + h0 / 2
    W, H = design.board.width, design.board.height
    q.x[i] = min(max(cx - w1 / 2, 0.0), max(W - w1, 0.0))
    q.y[i] = min(max(cy - h1 / 2, 0.0), max(H - h1, 0.0))
    q.r[i] = r
    return q


def flip(design, p, fx, fy):
    """Mirror the movable components across the board's center lines."""
    q = p.copy()
    eff = effective_dims(design, p.r)
    mov = design.movable
    if fx:
        q.x[mov] = (design.board.width - p.x - eff[:, 0])[mov]
    if fy:
        q.y[mov] = (design.board.height - p.y - eff[:, 1])[mov]
    return q


def orientation_search(design, seed, objective):
    """Best of four mirrored seeds, each followed by one greedy sweep over
    per-component orientation.  ``objective`` maps a placement to a cost."""
    best_p, best_f = seed.copy(), objective(seed)
    for fx, fy in ((False, False), (True, False), (False, True), (True, True)):
        p = flip(design, seed, fx, fy)
        f = best_f if not (fx or fy) else objective(p)
        for i, c in enumerate(design.components):
            if c.fixed:
                continue
            q = _set_orientation(design, p, i, 1 - p.r[i])
            fq = objective(q)
            if fq < f:
                p, f = q, fq
        if f < best_f:
            best_p, best_f = p, f
    log.debug("orientation search: best cost %.6g", best_f)
    return best_p
