import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ille.embedding import build_graph, embed, fix_signs, lle_objective, normalized_cut_indicators
from ille.exceptions import ParameterError, ShapeError, ValidationError
from oracles import d_orthonormalize, principal_angle_max, random_connected_graph

PAIR = np.array([[0.0, 1.0], [1.0, 0.0]])


def two_components(rng, sizes=(4, 5)):
    blocks = [random_connected_graph(rng, m, density=0.8) for m in sizes]
    n = sum(sizes)
    Z = np.zeros((n, n))
    Z[: sizes[0], : sizes[0]] = blocks[0]
    Z[sizes[0]:, sizes[0]:] = blocks[1]
    return Z


class TestBuildGraph:
    def test_pair(self):
        G = build_graph(PAIR)
        np.testing.assert_array_equal(G.d, [1.0, 1.0])
        np.testing.assert_array_equal(G.Z_tilde, PAIR)

    def test_self_loops(self):
        G = build_graph(np.eye(4))
        np.testing.assert_array_equal(G.d, np.ones(4))
        np.testing.assert_array_equal(G.Z_tilde, np.eye(4))

    def test_elementwise(self):
        rng = np.random.default_rng(0)
        A = rng.random((5, 5))
        Z = A + A.T
        G = build_graph(Z)
        for i in range(5):
            for j in range(5):
                assert G.Z_tilde[i, j] == pytest.approx(Z[i, j] / np.sqrt(Z[i].sum() * Z[j].sum()), rel=1e-14)
        mu = np.linalg.eigvalsh(G.laplacian())
        assert mu.min() >= -1e-8 and mu.max() <= 2 + 1e-8

    def test_asymmetric_rejected(self):
        with pytest.raises(ValidationError, match="symmetric"):
            build_graph([[0.0, 1.0], [0.5, 0.0]])

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            build_graph([[0.0, -1.0], [-1.0, 0.0]])

    def test_isolated_node_warns(self):
        Z = np.zeros((3, 3))
        Z[0, 1] = Z[1, 0] = 2.0
        with pytest.warns(RuntimeWarning, match="isolated"):
            G = build_graph(Z)
        assert G.Z[2, 2] == pytest.approx(2e-10)
        assert np.all(G.d > 0)
        assert G.Z[0, 1] == 2.0


class TestEmbed:
    def test_pair(self):
        E = embed(PAIR, 1)
        np.testing.assert_allclose(E.Y, [[1 / np.sqrt(2), 1 / np.sqrt(2)]], atol=1e-15)
        np.testing.assert_allclose(E.F[:, 0], [1 / np.sqrt(2)] * 2, atol=1e-15)
        assert E.eigenvalues[0] == pytest.approx(0.0, abs=1e-15)
        assert lle_objective(E, PAIR) == pytest.approx(0.0, abs=1e-15)

    def test_two_components(self):
        rng = np.random.default_rng(1)
        Z = two_components(rng)
        E = embed(Z, 2)
        np.testing.assert_allclose(E.eigenvalues, 0.0, atol=1e-12)
        for block in (slice(0, 4), slice(4, 9)):
            rows = E.Y[:, block]
            np.testing.assert_allclose(rows - rows[:, :1], 0.0, atol=1e-10)
        # dense full decomposition oracle: nullity two, eigenvalue 0 twice
        mu = np.linalg.eigvalsh(build_graph(Z).laplacian())
        assert np.sum(np.abs(mu) < 1e-10) == 2

    def test_connected_k1_constant(self):
        Z = random_connected_graph(np.random.default_rng(2), 8)
        E = embed(Z, 1)
        np.testing.assert_allclose(E.Y[0], E.Y[0, 0], rtol=1e-10)
        assert E.Y[0, 0] > 0

    def test_drop_trivial(self):
        Z = random_connected_graph(np.random.default_rng(3), 8)
        full = embed(Z, 3)
        dropped = embed(Z, 2, drop_trivial=True)
        np.testing.assert_allclose(dropped.eigenvalues, full.eigenvalues[1:], atol=1e-12)
        assert principal_angle_max(dropped.Y.T, full.Y[1:].T) <= 1e-8
        with pytest.raises(ParameterError):
            embed(Z, 8, drop_trivial=True)

    @pytest.mark.parametrize("k", [0, 4])
    def test_k_out_of_range(self, k):
        with pytest.raises(ParameterError):
            embed(random_connected_graph(np.random.default_rng(0), 3), k)

    def test_sign_convention(self):
        V = fix_signs(np.array([[0.1, -0.5], [-0.9, 0.5], [0.2, 0.0]]))
        # column 2 ties at |0.5|; the lower index decides
        np.testing.assert_array_equal(V, [[-0.1, 0.5], [0.9, -0.5], [-0.2, 0.0]])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(3, 30))
    def test_invariants(self, seed, n):
        rng = np.random.default_rng(seed)
        G = build_graph(random_connected_graph(rng, n))
        k = int(rng.integers(1, n + 1))
        E = embed(G, k)
        gram = (E.Y * G.d) @ E.Y.T
        assert np.abs(gram - np.eye(k)).max() <= 1e-8
        assert np.all(np.diff(E.eigenvalues) >= 0)
        assert E.eigenvalues.min() >= 0 and E.eigenvalues.max() <= 4 + 1e-8
        assert E.mu.min() >= -1e-8 and E.mu.max() <= 2 + 1e-8
        L = G.laplacian()
        res = L @ L @ E.F - E.F * E.eigenvalues
        assert np.linalg.norm(res, axis=0).max() <= 1e-8


class TestCutIndicators:
    def test_pair(self):
        C = normalized_cut_indicators(PAIR, 1)
        np.testing.assert_allclose(C.G[:, 0], [1 / np.sqrt(2)] * 2, atol=1e-15)
        np.testing.assert_allclose(C.H[:, 0], [1 / np.sqrt(2)] * 2, atol=1e-15)

    def test_components_span_indicators(self):
        rng = np.random.default_rng(4)
        Z = two_components(rng)
        C = normalized_cut_indicators(Z, 2)
        indicators = np.zeros((9, 2))
        indicators[:4, 0] = indicators[4:, 1] = 1.0
        assert principal_angle_max(C.H, indicators) <= 1e-8

    def test_full_basis(self):
        Z = random_connected_graph(np.random.default_rng(5), 7)
        C = normalized_cut_indicators(Z, 7)
        np.testing.assert_allclose(C.G.T @ C.G, np.eye(7), atol=1e-8)
        np.testing.assert_allclose(C.H, C.G / np.sqrt(build_graph(Z).d)[:, None], rtol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_equivalence(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(5, 41))
        G = build_graph(random_connected_graph(rng, n))
        k = int(rng.integers(1, n))
        mu_all = np.linalg.eigvalsh(G.laplacian())
        if mu_all[k] - mu_all[k - 1] < 1e-6:
            pytest.skip("no eigen-gap at k")
        E = embed(G, k)
        C = normalized_cut_indicators(G, k)
        assert principal_angle_max(E.Y.T, C.H) <= 1e-7
        np.testing.assert_allclose(E.eigenvalues, C.mu**2, atol=1e-9)


class TestObjective:
    def test_constant_rows(self):
        Z = random_connected_graph(np.random.default_rng(6), 6)
        assert lle_objective(np.full((2, 6), 3.7), Z) == pytest.approx(0.0, abs=1e-12)

    def test_two_formula_paths(self):
        rng = np.random.default_rng(7)
        Z = random_connected_graph(rng, 9)
        G = build_graph(Z)
        Y = rng.normal(size=(3, 9))
        # termwise sum
        P = Z / G.d[:, None]
        termwise = sum(G.d[i] * np.sum((Y[:, i] - sum(P[i, j] * Y[:, j] for j in range(9))) ** 2) for i in range(9))
        # trace form
        Ds = np.diag(np.sqrt(G.d))
        L = G.laplacian()
        trace = np.trace(Y @ Ds @ L @ L @ Ds @ Y.T)
        got = lle_objective(Y, G)
        assert got == pytest.approx(termwise, rel=1e-12)
        assert got == pytest.approx(trace, rel=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            lle_objective(np.ones((2, 3)), np.ones((4, 4)))

    @pytest.mark.parametrize("seed", range(5))
    def test_trace_identity_and_optimality(self, seed):
        rng = np.random.default_rng(200 + seed)
        n = int(rng.integers(5, 30))
        G = build_graph(random_connected_graph(rng, n))
        k = int(rng.integers(1, min(n, 5)))
        E = embed(G, k)
        best = lle_objective(E, G)
        assert best == pytest.approx(E.eigenvalues.sum(), abs=1e-8)
        for _ in range(20):
            Yr = d_orthonormalize(rng.normal(size=(k, n)), G.d)
            assert best <= lle_objective(Yr, G) + 1e-10

    def test_shift_invariance(self):
        rng = np.random.default_rng(8)
        G = build_graph(random_connected_graph(rng, 12))
        Y = embed(G, 3).Y
        base = lle_objective(Y, G)
        for _ in range(10):
            c = rng.normal(size=(3, 1)) * 10
            assert abs(lle_objective(Y - c, G) - base) <= 1e-10
