import math
from dataclasses import replace

import numpy as np
import pytest

from singpencil import (
    FieldKind,
    MethodConfig,
    Pencil,
    RngState,
    alpha_closed_form,
    cross_check,
    gamma_exact,
    scale_one_norm,
    solve,
    solve_augment,
    solve_modify,
    solve_project,
)
from singpencil.solvers import MatchFailure, chordal_distance, _modify_core

C, R = FieldKind.COMPLEX, FieldKind.REAL


def _finite_set(report, tol=1e-8):
    out = []
    for z in report.finite_eigenvalues:
        out.append(complex(z))
    return sorted(out, key=lambda z: (z.real, z.imag))


def _assert_matches(values, targets, tol=1e-8):
    assert len(values) == len(targets)
    for t in targets:
        assert min(abs(z - t) for z in values) < tol, (values, t)


class TestSolveOnHmp:
    @pytest.mark.parametrize("method", ["modify", "project", "augment"])
    def test_finds_true_eigenvalues(self, hmp, method):
        rep = solve(hmp[0], 2, MethodConfig(method=method, seed=17))
        _assert_matches(_finite_set(rep), [1 / 3, 0.5])

    def test_modify_class_counts(self, hmp):
        rep = solve_modify(hmp[0], 2, rng=RngState(18))
        counts = rep.counts
        assert counts["true_finite"] == 2
        assert counts["true_infinite"] == 1
        assert counts["prescribed"] == 2
        assert counts["random_right"] == 1
        assert counts["random_left"] == 2
        assert len(rep.records) == 8

    def test_project_record_count(self, hmp):
        rep = solve_project(hmp[0], 2, rng=RngState(19))
        assert len(rep.records) == 6  # n - k
        counts = rep.counts
        assert counts["true_finite"] == 2 and counts["true_infinite"] == 1
        assert counts["random_right"] == 1 and counts["random_left"] == 2

    def test_augment_record_count_and_prescribed(self, hmp):
        rep = solve_augment(hmp[0], 2, rng=RngState(20))
        assert len(rep.records) == 10  # n + k
        assert rep.counts["prescribed"] == 4  # 2k
        s_a, s_b = rep.artifacts["s_a"], rep.artifacts["s_b"]
        t_a, t_b = rep.artifacts["t_a"], rep.artifacts["t_b"]
        expected = list(s_a / s_b) + list(t_a / t_b)
        got = [r.value_scaled for r in rep.records if r.group == "prescribed"]
        for z in expected:
            assert min(abs(z - g) for g in got) < 1e-8

    def test_k_validation(self, hmp):
        with pytest.raises(ValueError):
            solve_modify(hmp[0], 0)
        with pytest.raises(ValueError):
            solve_modify(hmp[0], 8)

    def test_true_sigma_tau_below_threshold(self, hmp):
        cfg = MethodConfig(seed=21)
        rep = solve_modify(hmp[0], 2, cfg)
        for r in rep.records:
            small = max(r.sigma, r.tau) < cfg.delta1
            assert small == (r.group in ("true_finite", "true_infinite"))

    def test_real_field_draws(self, hmp):
        rep = solve_modify(hmp[0], 2, MethodConfig(field=R, seed=22))
        _assert_matches(_finite_set(rep), [1 / 3, 0.5])
        assert not np.iscomplexobj(rep.artifacts["u"])

    def test_seed_determinism(self, hmp):
        r1 = solve_modify(hmp[0], 2, MethodConfig(seed=23))
        r2 = solve_modify(hmp[0], 2, MethodConfig(seed=23))
        assert r1.to_json_dict() == r2.to_json_dict()


class TestSolveOnDelta25:
    @pytest.mark.parametrize("field", [C, R])
    def test_project_finds_all_nine(self, delta25, field):
        p, gt = delta25
        rep = solve_project(p, 4, MethodConfig(field=field, seed=24))
        finite = _finite_set(rep)
        assert len(finite) == 9
        _assert_matches(finite, gt.finite, tol=1e-6)
        real = [z for z in finite if abs(z.imag) < 1e-6]
        assert len(real) == 1
        assert abs(real[0].real + 2.41828) < 1e-4

    def test_modify_finds_all_nine(self, delta25):
        p, gt = delta25
        rep = solve_modify(p, 4, MethodConfig(seed=25))
        assert len(_finite_set(rep)) == 9
        assert rep.counts["prescribed"] == 4


class TestSolveOnBlockdiag10:
    @pytest.mark.parametrize("method", ["modify", "project", "augment"])
    def test_advertised_eigenvalues_found(self, blockdiag10, method):
        rep = solve(blockdiag10[0], 4, MethodConfig(method=method, seed=26))
        finite = _finite_set(rep)
        for target in (1 + 1j, 1 - 1j, 2.0, 1.0):
            assert min(abs(z - target) for z in finite) < 1e-8
        assert len(finite) == 4


class TestEigenvaluePreservation:
    def test_corpus_all_methods(self, corpus):
        for name, p, gt in corpus:
            targets = [w.value for w in gt.witnesses]
            for method in ("modify", "project", "augment"):
                rep = solve(p, gt.k, MethodConfig(method=method, seed=27))
                finite = rep.finite_eigenvalues
                for t in targets:
                    assert min(abs(z - t) for z in finite) < 1e-8, (name, method, t)

    def test_corpus_class_counts(self, corpus):
        for name, p, gt in corpus:
            rep = solve_modify(p, gt.k, MethodConfig(seed=28))
            counts = rep.counts
            assert counts["true_finite"] + counts["true_infinite"] == gt.r, name
            assert counts["prescribed"] == gt.k, name
            assert counts["random_right"] == gt.m_sum, name
            assert counts["random_left"] == gt.n_sum, name
            proj = solve_project(p, gt.k, MethodConfig(seed=29))
            assert len(proj.records) == gt.n - gt.k, name
            aug = solve_augment(p, gt.k, MethodConfig(seed=30))
            assert len(aug.records) == gt.n + gt.k, name
            assert aug.counts["prescribed"] == 2 * gt.k, name


class TestGammaInvariance:
    def test_tau_and_diagonals_do_not_move_gamma(self, hmp):
        # fixed U, V: changing tau and D_A, D_B leaves true-eigenvalue gamma
        ps = scale_one_norm(hmp[0])
        gen = RngState(31).generator()
        from singpencil.randstat import gaussian_matrix
        from singpencil.matcore import qr_positive

        u, _ = qr_positive(gaussian_matrix(8, 2, C, gen))
        v, _ = qr_positive(gaussian_matrix(8, 2, C, gen))
        gammas = {}
        for tau in (1e-1, 1e-2, 1e-3):
            d_a = gaussian_matrix(2, 1, C, gen)[:, 0]
            d_b = gaussian_matrix(2, 1, C, gen)[:, 0]
            cfg = MethodConfig(tau=tau)
            records, _ = _modify_core(ps, 2, cfg, u, v, d_a, d_b)
            for r in records:
                if r.group != "true_finite":
                    continue
                key = round(r.value.real, 6)
                gammas.setdefault(key, []).append(r.gamma)
        assert set(gammas) == {round(1 / 3, 6), 0.5}
        for vals in gammas.values():
            assert len(vals) == 3
            assert max(vals) - min(vals) < 1e-8


class TestCrossCheck:
    def test_hmp_gamma_agreement(self, hmp):
        report = cross_check(hmp[0], 2, seed=32)
        assert len(report.rows) == 2
        assert report.max_discrepancy <= 1e-8
        for row in report.rows:
            # gamma_i never exceeds the exact gamma of the scaled pencil
            assert max(row.gammas) <= row.gamma_reference + 1e-8

    def test_ratio_equals_closed_form_product(self, hmp):
        p, gt = hmp
        ps = scale_one_norm(p)
        rep = solve_modify(p, 2, MethodConfig(seed=33))
        u, v = rep.artifacts["u"], rep.artifacts["v"]
        for lam in (1 / 3, 0.5):
            w = gt.witness_for(lam)
            rec = min(
                (r for r in rep.records if r.group == "true_finite"),
                key=lambda r: abs(r.value - lam),
            )
            ratio = rec.gamma / gamma_exact(ps, rec.value_scaled, k=2)
            predicted = alpha_closed_form(v, w.right_inner, w.right_vec) * alpha_closed_form(
                u, w.left_inner, w.left_vec
            )
            assert abs(ratio - predicted) < 1e-8

    def test_blockdiag10_agreement(self, blockdiag10):
        report = cross_check(blockdiag10[0], 4, seed=34)
        assert len(report.rows) == 4
        assert report.max_discrepancy <= 1e-8

    def test_match_guard(self, hmp):
        # nearly coincident chordal pairs are flagged, not silently matched
        assert chordal_distance(1.0, 1.0, 1.0, 1.0) == 0.0
        assert chordal_distance(1.0, 0.0, 0.0, 1.0) == 1.0


class TestReportSerialization:
    def test_json_schema(self, hmp):
        rep = solve_modify(hmp[0], 2, MethodConfig(seed=35))
        data = rep.to_json_dict()
        assert data["schema"] == "singpencil/1"
        assert data["method"] == "modify"
        assert data["n"] == 8 and data["k"] == 2
        assert len(data["records"]) == 8
        assert data["counts"]["true_finite"] == 2
        assert all(len(z) == 2 for z in data["finite_eigenvalues"])
        with_vectors = rep.to_json_dict(include_vectors=True)
        assert len(with_vectors["records"][0]["right"]) == 8

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MethodConfig(method="qz")
        with pytest.raises(ValueError):
            MethodConfig(tau=0.0)
        with pytest.raises(ValueError):
            MethodConfig(delta1=-1.0)
