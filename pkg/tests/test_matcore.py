import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singpencil import (
    EigenTriple,
    FieldKind,
    SingularPencilSuspected,
    generalized_eigen,
    nullspace_basis,
    qr_positive,
    rank_with_tol,
)
from singpencil.kcfgen import paper_pencil
from singpencil.randstat import RngState, gaussian_matrix, stiefel_uniform


def _rng(seed):
    return RngState(seed).generator()


class TestQrPositive:
    def test_identity(self):
        q, r = qr_positive(np.eye(3))
        np.testing.assert_allclose(q, np.eye(3), atol=1e-14)
        np.testing.assert_allclose(r, np.eye(3), atol=1e-14)

    def test_pythagorean_column(self):
        q, r = qr_positive(np.array([[3.0], [4.0]]))
        np.testing.assert_allclose(q, [[0.6], [0.8]], atol=1e-15)
        np.testing.assert_allclose(r, [[5.0]], atol=1e-15)

    def test_complex_reconstruction(self):
        m = gaussian_matrix(5, 3, FieldKind.COMPLEX, RngState(7))
        q, r = qr_positive(m)
        np.testing.assert_allclose(q @ r, m, atol=1e-12 * np.linalg.norm(m))
        assert np.all(np.abs(np.diagonal(r).imag) == 0)
        assert np.all(np.diagonal(r).real >= 0)

    def test_rank_deficient_allowed(self):
        m = np.zeros((4, 2))
        q, r = qr_positive(m)
        np.testing.assert_allclose(q @ r, m, atol=1e-14)

    def test_rejects_wide_and_nonfinite(self):
        with pytest.raises(ValueError):
            qr_positive(np.ones((2, 3)))
        with pytest.raises(ValueError):
            qr_positive(np.array([[np.nan], [1.0]]))

    @settings(max_examples=30, deadline=None)
    @given(
        rows=st.integers(1, 12),
        extra=st.integers(0, 6),
        fld=st.sampled_from([FieldKind.REAL, FieldKind.COMPLEX]),
        seed=st.integers(0, 10**6),
    )
    def test_orthonormal_columns_property(self, rows, extra, fld, seed):
        cols = rows
        rows = rows + extra
        m = gaussian_matrix(rows, cols, fld, RngState(seed))
        q, r = qr_positive(m)
        np.testing.assert_allclose(q.conj().T @ q, np.eye(cols), atol=1e-12)
        assert np.all(np.diagonal(r).real >= 0)


class TestRankWithTol:
    def test_zero_matrix(self):
        assert rank_with_tol(np.zeros((4, 4))) == 0

    def test_tiny_below_default_tol(self):
        assert rank_with_tol(np.diag([1.0, 1e-20, 0.0])) == 1

    def test_hmp_matrices(self):
        # oracle values: exact integer ranks of the shipped matrices (the
        # pencil has an infinite eigenvalue, so rank(B) < nrank = 6)
        p = paper_pencil("hmp8x8")[0]
        assert rank_with_tol(p.a) == 6
        assert rank_with_tol(p.b) == 5

    def test_rejects_negative_tol_and_nan(self):
        with pytest.raises(ValueError):
            rank_with_tol(np.eye(2), -1.0)
        with pytest.raises(ValueError):
            rank_with_tol(np.array([[np.inf]]))

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(2, 10), r=st.integers(0, 10), seed=st.integers(0, 10**6))
    def test_unitary_invariance_property(self, n, r, seed):
        r = min(r, n)
        gen = _rng(seed)
        m = gaussian_matrix(n, r, FieldKind.COMPLEX, gen) @ gaussian_matrix(
            r, n, FieldKind.COMPLEX, gen
        ) if r else np.zeros((n, n), dtype=complex)
        u = stiefel_uniform(n, n, FieldKind.COMPLEX, gen)
        v = stiefel_uniform(n, n, FieldKind.COMPLEX, gen)
        assert rank_with_tol(m) == rank_with_tol(u @ m @ v) == r


class TestNullspaceBasis:
    def test_zero_matrix_full_basis(self):
        basis = nullspace_basis(np.zeros((2, 2)))
        assert basis.shape == (2, 2)
        np.testing.assert_allclose(basis.conj().T @ basis, np.eye(2), atol=1e-14)

    def test_row_vector(self):
        m = np.array([[1.0, 1.0]]) / np.sqrt(2)
        basis = nullspace_basis(m)
        assert basis.shape == (2, 1)
        assert abs(np.linalg.norm(basis[:, 0]) - 1) < 1e-14
        assert abs(m @ basis[:, 0]) < 1e-14

    def test_hmp_eigenvalue_nullity(self):
        p, _ = paper_pencil("hmp8x8")
        m = p.a - p.b / 3.0
        basis = nullspace_basis(m)
        assert basis.shape == (8, 3)  # k + 1 with k = 2
        assert np.linalg.norm(m @ basis) <= 10 * 1e-12 * np.linalg.norm(m)

    def test_full_rank_empty_basis(self):
        assert nullspace_basis(np.eye(3)).shape == (3, 0)

    @settings(max_examples=25, deadline=None)
    @given(
        rows=st.integers(1, 10),
        cols=st.integers(1, 10),
        seed=st.integers(0, 10**6),
        fld=st.sampled_from([FieldKind.REAL, FieldKind.COMPLEX]),
    )
    def test_rank_nullity_property(self, rows, cols, seed, fld):
        gen = _rng(seed)
        r = gen.integers(0, min(rows, cols) + 1)
        m = (
            gaussian_matrix(rows, int(r), fld, gen) @ gaussian_matrix(int(r), cols, fld, gen)
            if r
            else np.zeros((rows, cols), dtype=fld.dtype)
        )
        basis = nullspace_basis(m)
        assert rank_with_tol(m) + basis.shape[1] == cols


class TestGeneralizedEigen:
    def test_diagonal(self):
        triples = generalized_eigen(np.diag([1.0, 2.0]), np.eye(2))
        values = sorted(t.value.real for t in triples)
        np.testing.assert_allclose(values, [1.0, 2.0], atol=1e-12)
        for t in triples:
            i = int(round(t.value.real)) - 1
            assert abs(abs(t.right[i]) - 1) < 1e-12
            assert abs(abs(t.left[i]) - 1) < 1e-12

    def test_infinite_and_zero(self):
        triples = generalized_eigen(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        finite = [t for t in triples if t.is_finite]
        infinite = [t for t in triples if not t.is_finite]
        assert len(finite) == len(infinite) == 1
        assert abs(finite[0].alpha) < 1e-14  # the zero eigenvalue
        assert abs(infinite[0].beta) == 0.0

    def test_modified_hmp_pencil_contains_true_eigenvalues(self):
        p, _ = paper_pencil("hmp8x8")
        gen = _rng(123)
        u = stiefel_uniform(8, 2, FieldKind.COMPLEX, gen)
        v = stiefel_uniform(8, 2, FieldKind.COMPLEX, gen)
        d_a = gaussian_matrix(2, 1, FieldKind.COMPLEX, gen)[:, 0]
        d_b = gaussian_matrix(2, 1, FieldKind.COMPLEX, gen)[:, 0]
        at = p.a + 1e-2 * u @ np.diag(d_a) @ v.conj().T
        bt = p.b + 1e-2 * u @ np.diag(d_b) @ v.conj().T
        values = [t.value for t in generalized_eigen(at, bt) if t.is_finite]
        for target in (1.0 / 3.0, 0.5):
            assert min(abs(z - target) for z in values) < 1e-8

    def test_normalization_invariants(self):
        triples = generalized_eigen(
            gaussian_matrix(6, 6, FieldKind.COMPLEX, RngState(5)),
            gaussian_matrix(6, 6, FieldKind.COMPLEX, RngState(6)),
        )
        for t in triples:
            assert abs(abs(t.alpha) ** 2 + abs(t.beta) ** 2 - 1) < 1e-12
            assert abs(np.linalg.norm(t.right) - 1) < 1e-12
            assert abs(np.linalg.norm(t.left) - 1) < 1e-12

    @pytest.mark.parametrize("n", [3, 10, 30])
    @pytest.mark.parametrize("fld", [FieldKind.REAL, FieldKind.COMPLEX])
    def test_residuals_on_random_regular_pencils(self, n, fld):
        gen = _rng(1000 + n + (0 if fld is FieldKind.REAL else 1))
        a = gaussian_matrix(n, n, fld, gen)
        b = gaussian_matrix(n, n, fld, gen)
        tol = 100 * n * np.finfo(float).eps * (np.linalg.norm(a, "fro") + np.linalg.norm(b, "fro"))
        for t in generalized_eigen(a, b):
            op = t.beta * a - t.alpha * b
            assert np.linalg.norm(op @ t.right) <= tol
            assert np.linalg.norm(t.left.conj() @ op) <= tol

    def test_singular_pencil_detected(self):
        with pytest.raises(SingularPencilSuspected):
            generalized_eigen(np.zeros((3, 3)), np.zeros((3, 3)))

    def test_shape_and_field_validation(self):
        with pytest.raises(ValueError):
            generalized_eigen(np.ones((2, 3)), np.ones((2, 3)))
        with pytest.raises(ValueError):
            generalized_eigen(np.eye(2), np.eye(3))

    def test_mixed_field_promotes(self):
        triples = generalized_eigen(np.diag([1.0 + 0j, 2.0 + 0j]), np.eye(2))
        assert isinstance(triples[0], EigenTriple)
