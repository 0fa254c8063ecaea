import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from zndc.errors import DimensionError
from zndc.model import PatternMatrix, controllability_matrix, realize_pattern
from zndc.networks import complete_graph, mixed_spectrum_example
from zndc.numerics import (
    distinct_eigenvalues,
    eigenvalues,
    ky_fan_norm,
    max_bipartite_matching,
    nuclear_norm,
    numerical_rank,
    svd_full,
)
from zndc.structural import generic_rank

from .conftest import random_pattern


def _sorted(z):
    return sorted(np.round(z, 8), key=lambda v: (v.real, v.imag))


class TestEigenvalues:
    def test_diagonal(self):
        assert _sorted(eigenvalues(np.diag([1.0, 2.0]))) == [1, 2]

    def test_all_ones(self):
        assert np.allclose(sorted(eigenvalues(np.ones((3, 3))).real), [0, 0, 3], atol=1e-10)

    def test_mixed_spectrum_example(self):
        eig = eigenvalues(mixed_spectrum_example().A)
        assert np.allclose(sorted(eig.real), [-1, -1, 3, 4, 4, 4])

    def test_rejects_rectangular(self):
        with pytest.raises(DimensionError):
            eigenvalues(np.ones((2, 3)))

    def test_conjugate_closed(self, rng):
        for _ in range(20):
            a = rng.normal(size=(5, 5))
            eig = eigenvalues(a)
            for lam in eig:
                assert np.min(np.abs(eig - np.conj(lam))) < 1e-8


class TestDistinctEigenvalues:
    def test_example_spectrum(self):
        reps = distinct_eigenvalues(np.array([-1, -1, 3, 4, 4, 4], dtype=complex))
        assert np.allclose(reps, [-1, 3, 4])

    def test_conjugate_pair(self):
        reps = distinct_eigenvalues(np.array([1 + 2j, 1 - 2j]))
        assert len(reps) == 1 and reps[0] == pytest.approx(1 + 2j)

    def test_clustering(self):
        assert len(distinct_eigenvalues(np.array([2.0, 2.0 + 1e-12]))) == 1


class TestNumericalRank:
    def test_small_cases(self):
        assert numerical_rank(np.eye(4)) == 4
        assert numerical_rank(np.ones((3, 3))) == 1
        assert numerical_rank(np.zeros((3, 2))) == 0
        assert numerical_rank(np.zeros((3, 0))) == 0

    def test_complete_graph_controllability_matrix(self):
        assert numerical_rank(controllability_matrix(complete_graph(6))) == 1

    def test_against_full_pivot_elimination(self, rng):
        def gauss_rank(m, thresh):
            m = m.astype(float).copy()
            rank = 0
            rows, cols = m.shape
            for _ in range(min(rows, cols)):
                sub = np.abs(m[rank:, rank:])
                if sub.size == 0:
                    break
                i, j = np.unravel_index(np.argmax(sub), sub.shape)
                if sub[i, j] <= thresh:
                    break
                m[[rank, rank + i]] = m[[rank + i, rank]]
                m[:, [rank, rank + j]] = m[:, [rank + j, rank]]
                m[rank + 1 :] -= np.outer(m[rank + 1 :, rank] / m[rank, rank], m[rank])
                rank += 1
            return rank

        for _ in range(200):
            r, c = rng.integers(1, 8, size=2)
            k = rng.integers(0, min(r, c) + 1)
            m = rng.normal(size=(r, k)) @ rng.normal(size=(k, c))
            s = np.linalg.svd(m, compute_uv=False)
            thresh = 1e-10 * (s[0] if s.size else 0) * max(r, c)
            assert numerical_rank(m) == gauss_rank(m, thresh) == k


class TestSvd:
    def test_diagonal(self):
        assert np.allclose(svd_full(np.diag([3.0, 1.0])).singular_values, [3, 1])

    def test_zero(self):
        assert np.all(svd_full(np.zeros((3, 2))).singular_values == 0)

    def test_seed7_against_characteristic_polynomial(self):
        m = np.random.default_rng(7).normal(size=(5, 5))
        s = svd_full(m).singular_values
        roots = np.sort(np.roots(np.poly(m.T @ m)).real)[::-1]
        assert np.allclose(s, np.sqrt(np.clip(roots, 0, None)), atol=1e-8)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10**6))
    def test_reconstruction_and_orthonormality(self, r, c, seed):
        m = np.random.default_rng(seed).normal(size=(r, c))
        svd = svd_full(m)
        s = svd.singular_values
        assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
        assert np.linalg.norm(svd.reconstruct() - m) <= 1e-8 * max(s[0], 1e-300)
        u, v = svd.left_vectors, svd.right_vectors
        assert np.allclose(u.T @ u, np.eye(u.shape[1]), atol=1e-10)
        assert np.allclose(v.T @ v, np.eye(v.shape[1]), atol=1e-10)

    def test_norms(self, rng):
        m = rng.normal(size=(4, 6))
        s = sla.svdvals(m)
        assert nuclear_norm(m) == pytest.approx(s.sum())
        assert ky_fan_norm(m, 2) == pytest.approx(s[:2].sum())


class TestMatching:
    def test_complete_bipartite(self):
        assert max_bipartite_matching([(i, j) for i in range(3) for j in range(3)]) == 3

    def test_empty(self):
        assert max_bipartite_matching([]) == 0

    def test_padded_identity(self):
        # n = 5, m = 2: the n - m free diagonal entries of the padded pattern
        pat = PatternMatrix.diagonal(3, 5, 7)
        assert max_bipartite_matching(sorted(pat.support)) == 3

    def test_against_random_realization(self, rng):
        for k in range(200):
            r, c = rng.integers(1, 9, size=2)
            pat = random_pattern(rng, r, c)
            real = realize_pattern(pat, seed=k, magnitude_range=(1.0, 2.0))
            assert max_bipartite_matching(sorted(pat.support)) == numerical_rank(real)
            assert generic_rank(pat) == numerical_rank(real)
