import numpy as np
import pytest

from singpencil import (
    FieldKind,
    RngState,
    bounds_figure,
    ks_critical,
    ks_two_sample,
    mc_ratio,
    paper_pencil,
    real_on_complex_experiment,
    tail_bound,
)

from conftest import trial_count

C, R = FieldKind.COMPLEX, FieldKind.REAL


class TestMcRatio:
    def test_mean_and_ks_on_hmp(self, hmp):
        p, gt = hmp
        trials = trial_count(3000, 20000)
        rep = mc_ratio(p, gt, 1 / 3, "modify", C, trials, RngState(60))
        assert abs(rep.empirical_mean - 0.28444) < 0.03
        assert rep.ks_stat < ks_critical(trials)
        assert rep.match_failures == 0
        assert rep.counts.sum() == trials
        assert rep.bin_edges.shape == (101,)
        assert np.all(rep.samples <= 1.0) and np.all(rep.samples >= 0.0)

    def test_other_eigenvalue_behaves_identically(self, hmp):
        p, gt = hmp
        rep = mc_ratio(p, gt, 0.5, "modify", C, 2000, RngState(61))
        assert abs(rep.empirical_mean - 0.28444) < 0.04

    def test_deterministic_reports(self, hmp):
        p, gt = hmp
        r1 = mc_ratio(p, gt, 1 / 3, "modify", C, 1000, RngState(62))
        r2 = mc_ratio(p, gt, 1 / 3, "modify", C, 1000, RngState(62))
        assert r1.to_json_dict() == r2.to_json_dict()
        assert np.array_equal(r1.samples, r2.samples)

    def test_histogram_rows_shape(self, hmp):
        p, gt = hmp
        rep = mc_ratio(p, gt, 1 / 3, "project", C, 1000, RngState(63))
        rows = rep.histogram_rows()
        assert len(rows) == 100
        assert sum(r[2] for r in rows) == 1000
        assert all(r[3] >= 0 for r in rows)

    def test_requires_minimum_trials(self, hmp):
        p, gt = hmp
        with pytest.raises(ValueError):
            mc_ratio(p, gt, 1 / 3, "modify", C, 10, RngState(64))

    def test_threads_do_not_change_results(self, hmp, monkeypatch):
        p, gt = hmp
        base = mc_ratio(p, gt, 1 / 3, "modify", C, 1000, RngState(65))
        monkeypatch.setenv("SINGPENCIL_THREADS", "4")
        threaded = mc_ratio(p, gt, 1 / 3, "modify", C, 1000, RngState(65))
        assert np.array_equal(base.samples, threaded.samples)


class TestBoundsFigure:
    def test_complex_bound_columns(self):
        table = bounds_figure(4, C, (1e-2,), 100000, RngState(66))
        row = table.rows[0]
        assert row.empirical <= 2 * 4 * 1e-2  # simple bound with margin to spare
        assert row.simple_upper == pytest.approx(0.08)
        assert row.refined_upper == pytest.approx(16e-4 * (1 - 2 * np.log(1e-2)))
        assert row.lower is None

    def test_real_lower_bound_column(self):
        table = bounds_figure(8, R, (1e-3,), 100000, RngState(67))
        row = table.rows[0]
        assert row.lower == pytest.approx(tail_bound(1e-3, 8, R, "lower"))
        assert row.lower - 3 * row.std_err <= row.empirical

    def test_support_is_unit_interval(self):
        table = bounds_figure(2, C, (1.0,), 5000, RngState(68))
        assert table.rows[0].empirical == 1.0

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            bounds_figure(2, C, (0.0, 0.5), 1000, RngState(69))


class TestRealOnComplex:
    def test_two_pencils_differ_but_real_eigenvalue_matches_table(self):
        trials = trial_count(4000, 20000)
        rep1, rep2 = real_on_complex_experiment(trials, RngState(70))
        assert set(rep1.alt_ks) == {"real", "complex"}
        # the two equivalent pencils produce genuinely different distributions
        d = ks_two_sample(rep1.samples, rep2.samples)
        assert d > ks_critical(trials, trials)
        for rep in (rep1, rep2):
            assert 0.08 <= rep.empirical_mean <= 0.18

    def test_means_in_reported_ranges(self):
        trials = trial_count(4000, 100000)
        rep1, rep2 = real_on_complex_experiment(trials, RngState(71))
        assert 0.10 <= rep1.empirical_mean <= 0.15
        assert 0.11 <= rep2.empirical_mean <= 0.16
