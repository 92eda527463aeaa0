import numpy as np
import pytest
from scipy import stats

from imlike.diagnostics import (
    TABLE1_SETTINGS,
    CoverageRow,
    CoverageTable,
    ValidityResult,
    bayes_bf_sample,
    bf_coverage_table,
    bvm_check,
    u_statistic,
    u_statistic_quadratic,
    validity_sim,
    welch_interval,
    welch_nu,
)
from imlike.errors import (
    ConvergenceError,
    DegenerateDataError,
    InvalidParameterError,
)
from imlike.inner import InnerSampleSet
from imlike.models import LEHMANN_TRAVEL, BFData, GammaScale, GaussianLocation
from imlike.util import derive_rng


class TestValidityResult:
    def test_ecdf_counts_right_inclusive(self):
        res = ValidityResult(values=np.array([0.2, 0.5, 0.8]), ks=0.0)
        assert res.ecdf(0.5) == pytest.approx(2.0 / 3.0)
        assert res.ecdf(0.1) == 0.0
        assert res.ecdf(0.9) == 1.0
        np.testing.assert_allclose(res.ecdf([0.2, 0.8]), [1 / 3, 1.0])


class TestValiditySim:
    def test_gaussian_plausibility_at_truth_is_uniform(self):
        res = validity_sim(GaussianLocation(var=1.0), 0.0,
                           reps=500, M=500, seed=2)
        assert res.ks < 0.07
        assert (np.diff(res.values) >= 0).all()
        assert res.values.min() >= 0.0 and res.values.max() <= 1.0

    def test_gamma_scale_plausibility_at_truth_is_uniform(self):
        res = validity_sim(GammaScale(7), 2.0, reps=500, M=500, seed=2)
        assert res.ks < 0.07

    def test_rejects_small_reps(self):
        with pytest.raises(InvalidParameterError):
            validity_sim(GaussianLocation(), 0.0, reps=100)

    def test_thread_count_does_not_change_values(self, monkeypatch):
        monkeypatch.setenv("IMLIKE_THREADS", "1")
        a = validity_sim(GaussianLocation(), 0.0, reps=500, M=200, seed=4)
        monkeypatch.setenv("IMLIKE_THREADS", "4")
        b = validity_sim(GaussianLocation(), 0.0, reps=500, M=200, seed=4)
        np.testing.assert_array_equal(a.values, b.values)


class TestWelch:
    def test_nu_on_reference_dataset(self):
        assert welch_nu(LEHMANN_TRAVEL) == pytest.approx(4.003873, abs=1e-6)

    def test_nu_equal_groups_hits_pooled_df(self):
        data = BFData(8, 0.0, 1.3, 8, 0.0, 1.3)
        assert welch_nu(data) == pytest.approx(14.0)

    def test_interval_matches_formula(self):
        data = LEHMANN_TRAVEL
        iv = welch_interval(data, 0.1)
        se = np.sqrt(data.sd1**2 / data.n1 + data.sd2**2 / data.n2)
        half = stats.t.ppf(0.95, welch_nu(data)) * se
        center = data.mean2 - data.mean1
        assert iv.a == pytest.approx(center - half)
        assert iv.b == pytest.approx(center + half)

    def test_interval_rejects_bad_alpha(self):
        with pytest.raises(InvalidParameterError):
            welch_interval(LEHMANN_TRAVEL, 1.0)


class TestBayesBfSample:
    def test_right_haar_construction(self):
        data = BFData(5, 1.0, 2.0, 9, 3.0, 1.5)
        draws = bayes_bf_sample(data, "right-haar", 400, rng=derive_rng(8))
        rng = derive_rng(8)
        t1 = rng.standard_t(4, size=400)
        t2 = rng.standard_t(8, size=400)
        expect = (3.0 + 1.5 / np.sqrt(9) * t2) - (1.0 + 2.0 / np.sqrt(5) * t1)
        np.testing.assert_allclose(draws, expect)

    def test_jeffreys_uses_biased_scale_and_full_df(self):
        data = BFData(5, 1.0, 2.0, 9, 3.0, 1.5)
        draws = bayes_bf_sample(data, "jeffreys", 400, rng=derive_rng(8))
        rng = derive_rng(8)
        t1 = rng.standard_t(5, size=400)
        t2 = rng.standard_t(9, size=400)
        sc1 = np.sqrt(data.ss1 / 5) / np.sqrt(5)
        sc2 = np.sqrt(data.ss2 / 9) / np.sqrt(9)
        expect = (3.0 + sc2 * t2) - (1.0 + sc1 * t1)
        np.testing.assert_allclose(draws, expect)

    def test_centered_at_observed_difference(self):
        draws = bayes_bf_sample(LEHMANN_TRAVEL, "right-haar", 40000, seed=3)
        center = LEHMANN_TRAVEL.mean2 - LEHMANN_TRAVEL.mean1
        assert np.mean(draws) == pytest.approx(center, abs=0.05)

    def test_rejects_unknown_prior(self):
        with pytest.raises(InvalidParameterError):
            bayes_bf_sample(LEHMANN_TRAVEL, "flat", 10)


class TestCoverageTableObject:
    def table(self):
        rows = [CoverageRow("im", 0.9, 0.01, 2.5, 0.02),
                CoverageRow("welch", 0.88, 0.01, 2.4, 0.02)]
        return CoverageTable(rows=rows, settings={"n1": 3}, reps=100,
                             alpha=0.1, seed=0)

    def test_row_lookup(self):
        tab = self.table()
        assert tab.row("welch").coverage == 0.88
        with pytest.raises(KeyError):
            tab.row("wald")

    def test_to_csv(self, tmp_path):
        path = tmp_path / "table.csv"
        self.table().to_csv(path, comment="settings")
        lines = path.read_text().splitlines()
        assert lines[0] == "# settings"
        assert lines[1] == "method,coverage,coverage_se,mean_length,length_se"
        assert lines[2].startswith("im,0.9")
        assert len(lines) == 4


class TestBfCoverageTable:
    def test_smoke_run_covers_near_nominal(self):
        tab = bf_coverage_table(reps=100, M=500, n_post=500, seed=3)
        assert tab.failures == 0
        assert [r.method for r in tab.rows] == ["im", "welch", "jeffreys",
                                                "right-haar"]
        for r in tab.rows:
            assert 0.75 <= r.coverage <= 1.0
            assert r.mean_length > 0
            assert r.coverage_se > 0 and r.length_se > 0

    def test_chunking_does_not_change_results(self):
        a = bf_coverage_table(reps=100, M=300, n_post=300, seed=5, chunk=8)
        b = bf_coverage_table(reps=100, M=300, n_post=300, seed=5, chunk=3)
        assert a.rows == b.rows

    def test_narrow_grid_aborts_on_failures(self):
        with pytest.raises(ConvergenceError):
            bf_coverage_table(reps=100, M=200, n_post=200, seed=1,
                              span=0.5, num=11)

    def test_rejects_bad_arguments(self):
        with pytest.raises(InvalidParameterError):
            bf_coverage_table(reps=50)
        with pytest.raises(InvalidParameterError):
            bf_coverage_table(reps=100, alpha=0.0)

    def test_default_settings_are_the_study_design(self):
        assert TABLE1_SETTINGS == {"n1": 3, "n2": 20, "mean1": 2.0,
                                   "var1": 1.0, "mean2": 0.0, "var2": 2.0}


class TestBvmCheck:
    def test_matched_gaussian_sample_is_small(self):
        z = derive_rng(40).normal(0.0, 1.0, size=(20000, 1))
        assert bvm_check(z, [0.0], [[1.0]]) < 0.02

    def test_detects_wrong_information(self):
        z = derive_rng(41).normal(0.0, 2.0, size=(20000, 1))
        assert bvm_check(z, [0.0], [[0.25]]) < 0.02
        assert bvm_check(z, [0.0], [[1.0]]) > 0.1

    def test_accepts_sample_set_or_array(self):
        z = derive_rng(42).normal(0.0, 1.0, size=(500, 1))
        s = InnerSampleSet(levels=np.zeros(500), thetas=z,
                           pseudo=np.zeros(500, dtype=bool))
        assert bvm_check(s, [0.0], [[1.0]]) == bvm_check(z, [0.0], [[1.0]])


class TestUStatistic:
    @pytest.mark.parametrize("q,expect", [
        (0.5, 1.0), (0.0, 0.0), (1.0, 0.0), (0.25, 0.5), (0.75, 0.5),
    ])
    def test_folds_cdf_values(self, q, expect):
        assert u_statistic(q) == pytest.approx(expect)

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            u_statistic(1.5)


class TestUStatisticQuadratic:
    def test_hand_computed_rank(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 3.0]])
        got = u_statistic_quadratic(pts, [0.0, 1.5], mu_hat=np.zeros(2),
                                    Sigma_hat=np.eye(2), log_scale=False)
        # scores [0, 1, 4, 18] against 2.25: rank 0.5 folds to 1
        assert got == pytest.approx(1.0)

    def test_log_scale_matches_manual_transform(self):
        rng = derive_rng(43)
        logs = rng.standard_normal((200, 2))
        pts = np.exp(logs)
        truth = np.array([1.3, 0.7])
        a = u_statistic_quadratic(pts, truth, log_scale=True)
        b = u_statistic_quadratic(logs, np.log(truth), log_scale=False)
        assert a == pytest.approx(b)

    def test_accepts_sample_set(self):
        rng = derive_rng(44)
        pts = np.exp(rng.standard_normal((300, 2)))
        s = InnerSampleSet(levels=np.zeros(300), thetas=pts,
                           pseudo=np.zeros(300, dtype=bool))
        assert 0.0 <= u_statistic_quadratic(s, [1.0, 1.0]) <= 1.0

    def test_degenerate_sample_rejected(self):
        pts = np.ones((50, 2))
        with pytest.raises(DegenerateDataError):
            u_statistic_quadratic(pts, [1.0, 1.0], log_scale=False)
