import numpy as np
import pytest
from scipy.linalg import eigh

from nsplace.flow import RunConfig, objective_evaluator
from nsplace.generate import generate_design
from nsplace.objective import total_wa
from nsplace.spectral import (CliqueGraph, SpectralConfig, clique_expand, embed, flip, lowest_eigvecs,
                              normalized_laplacian, orientation_search, spectral_coordinates)

from conftest import make_design, placement


def chain_design(nets, n, areas=None, board=(20, 20)):
    comps = [(f"C{i}", 1.0 if areas is None else areas[i], 1.0,
              {str(k): (0.5, 0.5) for k in range(8)}) for i in range(n)]
    used = {}
    refs = []
    for e, members in enumerate(nets):
        r = []
        for i in members:
            used[i] = used.get(i, 0) + 1
            r.append(f"C{i}.{used[i] - 1}")
        refs.append((f"N{e}", r))
    return make_design((*board, 1), comps, refs)


class TestClique:
    def test_two_pin(self):
        A = clique_expand(chain_design([[0, 1]], 2)).adjacency
        assert A[0, 1] == 1 and A[1, 0] == 1

    def test_three_pin_half_weights(self):
        A = clique_expand(chain_design([[0, 1, 2]], 3)).adjacency
        assert A[0, 1] == A[1, 2] == A[0, 2] == 0.5

    def test_accumulates(self):
        A = clique_expand(chain_design([[0, 1], [0, 1]], 2)).adjacency
        assert A[0, 1] == 2


class TestLaplacian:
    def test_single_edge(self):
        g = CliqueGraph(np.array([[0.0, 1.0], [1.0, 0.0]]), np.ones(2))
        assert normalized_laplacian(g) == pytest.approx(np.array([[1, -1], [-1, 1]]))

    def test_isolated_node_row(self):
        g = CliqueGraph(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], float), np.ones(3))
        assert normalized_laplacian(g)[2] == pytest.approx([0, 0, 1])

    def test_spectrum_in_unit_range(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            W = np.triu(rng.uniform(0, 1, (8, 8)) * (rng.uniform(size=(8, 8)) < 0.4), 1)
            ev = np.linalg.eigvalsh(normalized_laplacian(CliqueGraph(W + W.T, np.ones(8))))
            assert ev.min() >= -1e-12 and ev.max() <= 2 + 1e-12


class TestEigen:
    def test_lanczos_matches_dense_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            n = 12
            X = rng.standard_normal((n, n))
            M = X + X.T
            c = rng.uniform(0.5, 2, n)
            vals, vecs = lowest_eigvecs(M, c, 2, tol=1e-10)
            P = np.eye(n) - np.outer(c, c) / (c @ c)
            Q = np.linalg.svd(P)[0][:, :n - 1]
            ref = eigh(Q.T @ M @ Q, eigvals_only=True)[:2]
            assert vals == pytest.approx(ref, abs=1e-7)
            assert np.abs(vecs.T @ c).max() < 1e-8

    def test_embedding_solves_constrained_generalized_problem(self):
        d = generate_design(10, 12, 40, 30, seed=3)
        g = clique_expand(d)
        L = normalized_laplacian(g)
        v = g.areas
        x, y = embed(d, SpectralConfig(tol=1e-10))
        assert abs(v @ x) < 1e-8 and abs(v @ y) < 1e-8
        assert x @ (v * x) == pytest.approx(d.n) and y @ (v * y) == pytest.approx(d.n)
        # Oracle: generalized eigenproblem L z = mu V z restricted to v.z = 0.
        basis = np.linalg.svd(np.vstack([v]), full_matrices=True)[2][1:].T   # v.z = 0
        mu, Z = eigh(basis.T @ L @ basis, basis.T @ np.diag(v) @ basis)
        for vec, k in ((x, 0), (y, 1)):
            z = basis @ Z[:, k]
            cos = abs(z @ (v * vec)) / np.sqrt((z @ (v * z)) * (vec @ (v * vec)))
            assert cos == pytest.approx(1.0, abs=1e-6)


class TestSeed:
    def test_path_orders_middle_between_ends(self):
        d = chain_design([[0, 1], [1, 2]], 3)
        p = spectral_coordinates(d)
        xs = p.x
        assert min(xs[0], xs[2]) < xs[1] < max(xs[0], xs[2])

    def test_star_center_at_leaf_centroid(self):
        d = chain_design([[0, k] for k in range(1, 6)], 6)
        x, y = embed(d, SpectralConfig(tol=1e-12))
        assert x[0] == pytest.approx(x[1:].mean(), abs=1e-6)
        assert y[0] == pytest.approx(y[1:].mean(), abs=1e-6)

    def test_single_component_centered(self):
        d = make_design((10, 6, 1), [("A", 2, 2, {})])
        p = spectral_coordinates(d)
        assert (p.x[0], p.y[0]) == (4.0, 2.0)

    def test_in_bounds_and_fixed_kept(self):
        d = generate_design(12, 10, 40, 30, seed=5, n_fixed=2)
        p = spectral_coordinates(d)
        for i, c in enumerate(d.components):
            assert 0 <= p.x[i] <= 40 - c.width and 0 <= p.y[i] <= 30 - c.height
            if c.fixed:
                assert (p.x[i], p.y[i], p.r[i]) == c.fixed_position


class TestOrientation:
    def test_center_pins_keep_r0(self):
        d = chain_design([[0, 1], [1, 2]], 3)
        seed = spectral_coordinates(d)
        out = orientation_search(d, seed, objective_evaluator(d, RunConfig(lambda_ns=0)))
        assert not out.r.any()

    def test_single_tall_component_matches_exhaustive_choice(self):
        d = make_design((30, 30, 1), [("T", 1, 8, {"a": (0.5, 8)}), ("F", 1, 1, {"a": (0, 0.5)}, (25, 5, 0))],
                        [("N", ["T.a", "F.a"])])
        seed = placement(d, [10, 25], [10, 5])
        f = lambda p: total_wa(d, p, 0.3)
        out = orientation_search(d, seed, f)
        costs = []
        for fx in (False, True):
            for fy in (False, True):
                q = flip(d, seed, fx, fy)
                costs.append(f(q))
                cx, cy = q.x[0] + 0.5, q.y[0] + 4.0     # rotate T about its center
                q.x[0], q.y[0], q.r[0] = cx - 4.0, cy - 0.5, 1
                costs.append(f(q))
        assert f(out) == pytest.approx(min(costs), rel=1e-12)

    def test_never_worse_than_seed(self):
        d = generate_design(10, 8, 40, 30, seed=6)
        seed = spectral_coordinates(d)
        f = objective_evaluator(d, RunConfig(lambda_ns=0))
        assert f(orientation_search(d, seed, f)) <= f(seed)
