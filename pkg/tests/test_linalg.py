"""Dense symmetric eigensolver, Gram helpers, and truncation."""

import numpy as np
import pytest

from oracles import eig_extremes_2x2, power_sigma_max

from ripkit.errors import NonSymmetricError, OverlappingSupportsError, PreconditionError
from ripkit.linalg import (
    check_support,
    cross_gram_spectral_norm,
    gram_submatrix,
    sym_eig,
    truncate_top_k,
)


class TestSymEig:
    def test_identity(self):
        res = sym_eig(np.eye(4))
        assert np.allclose(res.eigenvalues, 1.0, atol=1e-14)

    def test_diagonal_sorted_ascending(self):
        res = sym_eig(np.diag([3.0, -1.0, 2.0]))
        assert np.allclose(res.eigenvalues, [-1.0, 2.0, 3.0], atol=1e-14)

    def test_2x2_against_quadratic_formula(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            a, b, c = rng.normal(size=3) * 3.0
            lo, hi = eig_extremes_2x2(a, b, c)
            res = sym_eig(np.array([[a, b], [b, c]]))
            assert res.eigenvalues[0] == pytest.approx(lo, abs=1e-12)
            assert res.eigenvalues[-1] == pytest.approx(hi, abs=1e-12)

    def test_equicorrelation_4x4_spectrum(self):
        # diag 1, off-diagonal -1/3: eigenvalues are 0 once and 4/3 thrice
        g = np.full((4, 4), -1.0 / 3.0)
        np.fill_diagonal(g, 1.0)
        res = sym_eig(g)
        assert np.allclose(res.eigenvalues, [0.0, 4 / 3, 4 / 3, 4 / 3], atol=1e-12)

    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(5)
        for n in (1, 2, 3, 6, 9):
            m = rng.normal(size=(n, n))
            sym = (m + m.T) / 2.0
            res = sym_eig(sym)
            v = res.eigenvectors
            assert np.allclose(v @ np.diag(res.eigenvalues) @ v.T, sym, atol=1e-10)
            assert np.allclose(v.T @ v, np.eye(n), atol=1e-12)

    def test_agrees_with_numpy(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(2, 8))
            m = rng.normal(size=(n, n))
            sym = m + m.T
            ours = sym_eig(sym).eigenvalues
            ref = np.linalg.eigvalsh(sym)
            assert np.allclose(ours, ref, atol=1e-10)

    def test_rejects_nonsymmetric(self):
        with pytest.raises(NonSymmetricError):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(PreconditionError):
            sym_eig(np.ones((2, 3)))


class TestSupportsAndGram:
    def test_check_support_sorts_and_validates(self):
        assert check_support((2, 0, 1), 5) == (0, 1, 2)
        with pytest.raises(PreconditionError):
            check_support((0, 0), 5)
        with pytest.raises(PreconditionError):
            check_support((5,), 5)
        with pytest.raises(PreconditionError):
            check_support((-1,), 5)

    def test_gram_submatrix_identity(self):
        g = gram_submatrix(np.eye(5), (1, 3))
        assert np.allclose(g, np.eye(2), atol=0.0)

    def test_gram_submatrix_values(self):
        phi = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
        g = gram_submatrix(phi, (0, 2))
        assert np.allclose(g, [[1.0, 1.0], [1.0, 2.0]], atol=0.0)

    def test_cross_gram_requires_disjoint(self):
        with pytest.raises(OverlappingSupportsError):
            cross_gram_spectral_norm(np.eye(4), (0, 1), (1, 2))

    def test_cross_gram_identity_is_zero(self):
        assert cross_gram_spectral_norm(np.eye(4), (0, 1), (2, 3)) == pytest.approx(0.0, abs=1e-14)

    def test_cross_gram_against_power_iteration(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            phi = rng.normal(size=(6, 9))
            ours = cross_gram_spectral_norm(phi, (0, 2, 5), (1, 3))
            block = phi[:, [0, 2, 5]].T @ phi[:, [1, 3]]
            assert ours == pytest.approx(power_sigma_max(block), abs=1e-9)


class TestTruncateTopK:
    def test_known_split(self):
        kept, rest = truncate_top_k(np.array([3.0, -5.0, 1.0]), 1)
        assert np.array_equal(kept, [0.0, -5.0, 0.0])
        assert np.array_equal(rest, [3.0, 0.0, 1.0])

    def test_ties_keep_lower_index(self):
        kept, rest = truncate_top_k(np.array([1.0, 1.0, 1.0, 1.0]), 2)
        assert np.array_equal(kept, [1.0, 1.0, 0.0, 0.0])
        assert np.array_equal(rest, [0.0, 0.0, 1.0, 1.0])

    def test_extremes(self):
        v = np.array([2.0, -1.0])
        kept, rest = truncate_top_k(v, 0)
        assert not kept.any() and np.array_equal(rest, v)
        kept, rest = truncate_top_k(v, 2)
        assert np.array_equal(kept, v) and not rest.any()

    def test_partition_property(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            v = rng.normal(size=10)
            k = int(rng.integers(0, 11))
            kept, rest = truncate_top_k(v, k)
            assert np.array_equal(kept + rest, v)
            assert int(np.count_nonzero(kept)) <= k
            if k < 10:
                # every kept magnitude dominates every discarded one
                kept_min = np.min(np.abs(kept[kept != 0.0])) if kept.any() else np.inf
                assert kept_min >= np.max(np.abs(rest)) - 1e-15

    def test_rejects_bad_k(self):
        with pytest.raises(PreconditionError):
            truncate_top_k(np.ones(3), 4)
        with pytest.raises(PreconditionError):
            truncate_top_k(np.ones(3), -1)


def test_submatrix_eigenvalues_interlace():
    # extreme eigenvalues are monotone in the support: the deviation on a
    # subset never exceeds the deviation on a superset
    rng = np.random.default_rng(41)
    phi = rng.normal(size=(7, 10))
    phi /= np.linalg.norm(phi, axis=0)
    small = sym_eig(gram_submatrix(phi, (1, 4))).eigenvalues
    big = sym_eig(gram_submatrix(phi, (1, 4, 7))).eigenvalues
    assert big[0] <= small[0] + 1e-12
    assert big[-1] >= small[-1] - 1e-12
