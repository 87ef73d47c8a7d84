import numpy as np
import pytest

from singpencil import (
    FieldKind,
    Pencil,
    ZeroMatrix,
    normal_rank,
    paper_pencil,
    scale_one_norm,
)
from singpencil.randstat import RngState, gaussian_matrix, stiefel_uniform


class TestScaleOneNorm:
    def test_divides_by_column_sum_norm(self):
        a = np.array([[1.0, 3.0], [1.0, 1.0]])  # ||A||_1 = 4
        b = np.eye(2)
        p = scale_one_norm(Pencil(a, b))
        np.testing.assert_allclose(p.a, a / 4.0)
        assert p.scale_a == 4.0 and p.scale_b == 1.0
        assert p.scaled

    def test_idempotent(self):
        p = scale_one_norm(Pencil(np.array([[2.0, 0], [0, 1.0]]), np.eye(2)))
        again = scale_one_norm(p)
        assert again is p

    def test_hmp_norms(self, hmp):
        p, _ = hmp
        # oracle: direct maximum absolute column sums of the shipped matrices
        expected_a = np.abs(p.a).sum(axis=0).max()
        expected_b = np.abs(p.b).sum(axis=0).max()
        ps = scale_one_norm(p)
        assert ps.scale_a == expected_a == 17.0
        assert ps.scale_b == expected_b == 31.0
        assert abs(np.abs(ps.a).sum(axis=0).max() - 1.0) < 1e-15
        assert abs(np.abs(ps.b).sum(axis=0).max() - 1.0) < 1e-15

    def test_zero_matrix_rejected(self):
        with pytest.raises(ZeroMatrix):
            scale_one_norm(Pencil(np.zeros((2, 2)), np.eye(2)))
        with pytest.raises(ZeroMatrix):
            scale_one_norm(Pencil(np.eye(2), np.zeros((2, 2))))

    def test_eigenvalue_frame_mapping(self, hmp):
        p, _ = hmp
        ps = scale_one_norm(p)
        lam_scaled = (1.0 / 3.0) * ps.scale_b / ps.scale_a
        m = ps.a - lam_scaled * ps.b
        s = np.linalg.svd(m, compute_uv=False)
        assert s[-3] / s[0] < 1e-12  # nullity 3 at the mapped eigenvalue


class TestPencilValidation:
    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            Pencil(np.ones((2, 3)), np.ones((2, 3)))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            Pencil(np.eye(2), np.eye(3))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Pencil(np.array([[np.nan, 0], [0, 1.0]]), np.eye(2))

    def test_field_promotion(self):
        p = Pencil(np.eye(2), 1j * np.eye(2))
        assert p.field is FieldKind.COMPLEX
        assert np.iscomplexobj(p.a)


class TestNormalRank:
    def test_hmp(self, hmp):
        info = normal_rank(hmp[0], rng=RngState(1))
        assert info.nrank == 6 and info.k == 2
        assert info.nrank == max(info.per_point_rank)

    def test_delta25(self, delta25):
        info = normal_rank(delta25[0], rng=RngState(2))
        assert info.nrank == 21 and info.k == 4

    def test_blockdiag10(self, blockdiag10):
        info = normal_rank(blockdiag10[0], rng=RngState(3))
        assert info.nrank == 6 and info.k == 4

    def test_sample_points_in_annulus_and_complex(self, hmp):
        info = normal_rank(hmp[0], samples=5, rng=RngState(7))
        assert len(info.sample_points) == 5
        for z in info.sample_points:
            assert 0.5 <= abs(z) <= 2.0
            assert isinstance(z, complex) and z.imag != 0

    def test_invariant_under_equivalence(self, corpus):
        gen = RngState(99).generator()
        for name, p, gt in corpus[:4]:
            left = stiefel_uniform(p.n, p.n, FieldKind.COMPLEX, gen)
            right = stiefel_uniform(p.n, p.n, FieldKind.COMPLEX, gen)
            q = Pencil(left @ p.a @ right, left @ p.b @ right)
            assert normal_rank(q, rng=RngState(5)).nrank == gt.nrank, name

    def test_three_samples_recover_declared_nrank(self, corpus):
        for seed, (name, p, gt) in enumerate(corpus):
            info = normal_rank(p, samples=3, rng=RngState(1234 + seed))
            assert info.nrank == gt.nrank, name
            assert info.k == gt.k, name

    def test_requires_positive_samples(self, hmp):
        with pytest.raises(ValueError):
            normal_rank(hmp[0], samples=0)
