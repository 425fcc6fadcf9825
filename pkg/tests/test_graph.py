import numpy as np
import pytest

from flnnsc.graph import SimilarityGraph, knn_similarity, laplacian
from flnnsc.linalg import sym_eigen


def brute_force_knn(x, k):
    """All-pairs oracle: directed k-nn with index tie-breaks, OR-symmetrized."""
    n = x.shape[1]
    d2 = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            d2[i, j] = np.sum((x[:, i] - x[:, j]) ** 2)
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        order = sorted((d2[i, j], j) for j in range(n) if j != i)
        for _, j in order[:k]:
            adj[i, j] = True
    return adj | adj.T


class TestKnnSimilarity:
    def test_identical_points_ties(self):
        x = np.zeros((2, 3))
        g = knn_similarity(x, 1, "binary")
        s = g.s
        assert np.array_equal(s, s.T)
        assert np.all(np.diag(s) == 0)
        # ties broken by lowest index: everyone picks sample 0 (or 1 for sample 0)
        assert s[0, 1] == 1.0 and s[1, 0] == 1.0
        assert s[2, 0] == 1.0
        assert s[2, 1] == 0.0

    def test_two_point_heat_kernel(self):
        x = np.array([[0.0, 3.0]])
        dist = 3.0
        g = knn_similarity(x, 1, "heat", sigma=dist)
        assert np.isclose(g.s[0, 1], np.exp(-0.5))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        x = np.hstack(
            [rng.normal(0.0, 0.3, (2, 15)), rng.normal(3.0, 0.3, (2, 15))]
        )
        g = knn_similarity(x, 4, "binary")
        assert np.array_equal(g.s > 0, brute_force_knn(x, 4))

    def test_default_sigma_is_median(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((3, 10))
        g = knn_similarity(x, 3, "heat")
        assert g.sigma is not None and g.sigma > 0

    def test_k_out_of_range(self):
        x = np.zeros((2, 3))
        with pytest.raises(ValueError, match="k must satisfy"):
            knn_similarity(x, 3, "binary")
        with pytest.raises(ValueError, match="k must satisfy"):
            knn_similarity(x, 0, "binary")

    def test_bad_sigma(self):
        x = np.zeros((2, 3))
        with pytest.raises(ValueError, match="sigma"):
            knn_similarity(x, 1, "heat", sigma=-1.0)

    def test_every_row_connected(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((4, 20))
        g = knn_similarity(x, 2, "binary")
        assert np.all(g.s.sum(axis=1) > 0)


class TestLaplacian:
    def test_path_graph(self):
        g = SimilarityGraph(s=np.array([[0.0, 1.0], [1.0, 0.0]]), k=1)
        assert np.array_equal(laplacian(g), [[1.0, -1.0], [-1.0, 1.0]])

    def test_single_node(self):
        g = SimilarityGraph(s=np.zeros((1, 1)), k=0)
        assert np.array_equal(laplacian(g), [[0.0]])

    def test_all_ones_nullspace(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((3, 25))
        lap = laplacian(knn_similarity(x, 4, "binary"))
        eig = sym_eigen(lap)
        assert eig.values[0] >= -1e-10 * np.linalg.norm(lap)
        assert np.linalg.norm(lap @ np.ones(25)) <= 1e-10 * np.linalg.norm(lap)

    def test_binary_weights_integer_valued(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((2, 12))
        lap = laplacian(knn_similarity(x, 3, "binary"))
        assert np.array_equal(lap, np.round(lap))

    def test_connected_second_eigenvalue_positive(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((2, 15))  # one blob: k-nn graph is connected
        lap = laplacian(knn_similarity(x, 5, "binary"))
        eig = sym_eigen(lap)
        assert eig.values[1] > 1e-8


def test_quadratic_form_identity():
    # x^T L x == 0.5 * sum_ij S_ij (x_i - x_j)^2
    rng = np.random.default_rng(7)
    for trial in range(20):
        pts = rng.standard_normal((3, 12))
        kind = "binary" if trial % 2 == 0 else "heat"
        g = knn_similarity(pts, 3, kind)
        lap = laplacian(g)
        v = rng.standard_normal(12)
        direct = float(v @ lap @ v)
        pairwise = 0.5 * float(np.sum(g.s * (v[:, None] - v[None, :]) ** 2))
        assert np.isclose(direct, pairwise, rtol=1e-9, atol=1e-12)


def test_laplacian_row_sums_zero():
    rng = np.random.default_rng(8)
    for _ in range(10):
        pts = rng.standard_normal((4, 10))
        lap = laplacian(knn_similarity(pts, 3, "heat"))
        assert np.all(np.abs(lap.sum(axis=1)) <= 1e-10 * max(1.0, np.linalg.norm(lap)))
        assert np.array_equal(lap, lap.T)
