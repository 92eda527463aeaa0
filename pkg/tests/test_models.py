import numpy as np
import pytest
from scipy import optimize, stats

from imlike.errors import (
    DatasetError,
    DegenerateDataError,
    DomainError,
    InvalidParameterError,
)
from imlike.models import (
    AnglesData,
    BFData,
    Correlation,
    GammaScale,
    GammaShapeScale,
    GaussianLocation,
    LEHMANN_TRAVEL,
    Model,
    VonMisesMean,
    bf_profile_fit,
    bf_profile_rloglik,
    load_angles_csv,
    load_pairs_csv,
    load_values_csv,
    polar_stats,
    relative_likelihood,
)
from imlike.util import derive_rng


class TestGaussianLocation:
    def test_log_density_matches_reference(self):
        m = GaussianLocation(var=4.0)
        assert m.log_density(1.2, 0.5) == pytest.approx(
            stats.norm.logpdf(1.2, 0.5, 2.0), abs=1e-12)

    def test_mle_is_observation(self):
        assert GaussianLocation().mle(3.7) == 3.7

    def test_observed_info(self):
        np.testing.assert_allclose(GaussianLocation(var=4.0).observed_info(0.0, 0.0),
                                   [[0.25]])

    def test_var_validated(self):
        with pytest.raises(InvalidParameterError):
            GaussianLocation(var=0.0)

    def test_sample_shape_and_determinism(self):
        m = GaussianLocation()
        a = m.sample(1.0, 5, derive_rng(0))
        b = m.sample(1.0, 5, derive_rng(0))
        assert a.shape == (5,)
        np.testing.assert_array_equal(a, b)


class TestGammaScale:
    def test_log_density_matches_reference(self):
        m = GammaScale(7)
        assert m.log_density(14.0, 2.5) == pytest.approx(
            stats.gamma.logpdf(14.0, a=7, scale=2.5), abs=1e-12)

    def test_mle(self):
        assert GammaScale(7).mle(14.0) == pytest.approx(2.0)

    def test_observed_info_closed_form_at_mle(self):
        # at theta = x/n the curvature simplifies to n^3 / x^2
        m = GammaScale(7)
        J = m.observed_info(14.0, 2.0)
        assert J[0, 0] == pytest.approx(7.0**3 / 14.0**2, abs=1e-10)

    def test_observed_info_matches_finite_difference(self):
        m = GammaScale(7)
        J_fd = Model.observed_info(m, 14.0, 2.0)
        np.testing.assert_allclose(J_fd, m.observed_info(14.0, 2.0), rtol=1e-4)


class TestVonMisesMean:
    def test_log_density_matches_reference(self):
        m = VonMisesMean(kappa=4.0, n=3)
        x = np.array([0.1, 0.5, 1.2])
        expect = np.sum(stats.vonmises.logpdf(x, kappa=4.0, loc=0.7))
        assert m.log_density(x, 0.7) == pytest.approx(expect, abs=1e-10)

    def test_mle_is_mean_direction(self):
        m = VonMisesMean(kappa=2.0, n=2)
        x = np.array([0.0, np.pi / 2.0])
        assert m.mle(x) == pytest.approx(np.pi / 4.0)

    def test_observed_info_is_kappa_n_u(self):
        m = VonMisesMean(kappa=4.0, n=2)
        x = np.array([0.0, np.pi / 2.0])
        expect = 4.0 * 2 * np.cos(np.pi / 4.0)
        assert m.observed_info(x, m.mle(x))[0, 0] == pytest.approx(expect)


class TestCorrelation:
    @staticmethod
    def _numeric_mle(m, x):
        obj = lambda r: -m.log_density(x, r)
        res = optimize.minimize_scalar(obj, bounds=(-0.999, 0.999),
                                       method="bounded",
                                       options={"xatol": 1e-10})
        return res.x

    def test_log_density_matches_reference(self):
        m = Correlation(n=4)
        x = derive_rng(1).standard_normal((4, 2))
        cov = np.array([[1.0, 0.3], [0.3, 1.0]])
        expect = np.sum(stats.multivariate_normal.logpdf(x, cov=cov))
        assert m.log_density(x, 0.3) == pytest.approx(expect, abs=1e-10)

    @pytest.mark.parametrize("r_true", [-0.7, 0.0, 0.5])
    def test_mle_matches_numeric_optimum(self, r_true):
        m = Correlation(n=40)
        x = m.sample(r_true, 1, derive_rng(3))[0]
        assert m.mle(x) == pytest.approx(self._numeric_mle(m, x), abs=1e-6)

    def test_batch_mle_matches_per_row(self):
        m = Correlation(n=15)
        xs = m.sample(0.4, 6, derive_rng(4))
        batch = m.mle(xs)
        each = np.array([m.mle(x) for x in xs])
        np.testing.assert_allclose(batch, each, atol=1e-12)

    def test_sample_correlation_tracks_theta(self):
        m = Correlation(n=20000)
        x = m.sample(0.6, 1, derive_rng(5))[0]
        emp = np.corrcoef(x[:, 0], x[:, 1])[0, 1]
        assert emp == pytest.approx(0.6, abs=0.02)


class TestGammaShapeScale:
    def test_log_density_matches_reference(self):
        m = GammaShapeScale(n=3)
        x = np.array([1.0, 2.5, 4.0])
        expect = np.sum(stats.gamma.logpdf(x, a=2.2, scale=1.7))
        assert m.log_density(x, np.array([2.2, 1.7])) == pytest.approx(
            expect, abs=1e-10)

    def test_mle_solves_score_equations(self):
        m = GammaShapeScale(n=50)
        x = m.sample(np.array([7.0, 3.0]), 1, derive_rng(6))[0]
        a, s = m.mle(x)
        from scipy.special import digamma
        assert np.log(a) - digamma(a) == pytest.approx(
            np.log(np.mean(x)) - np.mean(np.log(x)), abs=1e-10)
        assert s == pytest.approx(np.mean(x) / a, abs=1e-12)

    def test_batch_mle_matches_per_row(self):
        m = GammaShapeScale(n=30)
        xs = m.sample(np.array([4.0, 2.0]), 5, derive_rng(7))
        batch = m.mle(xs)
        each = np.array([m.mle(x) for x in xs])
        assert batch.shape == (5, 2)
        np.testing.assert_allclose(batch, each, atol=1e-12)

    def test_observed_info_matches_finite_difference(self):
        m = GammaShapeScale(n=25)
        x = m.sample(np.array([5.0, 2.0]), 1, derive_rng(8))[0]
        th = m.mle(x)
        np.testing.assert_allclose(Model.observed_info(m, x, th),
                                   m.observed_info(x, th), rtol=1e-3)

    def test_constant_data_degenerate(self):
        m = GammaShapeScale(n=4)
        with pytest.raises(DegenerateDataError):
            m.mle(np.full(4, 3.3))


class TestLikelihoodOps:
    def test_relative_likelihood_peaks_at_mle(self):
        m = GammaScale(7)
        assert relative_likelihood(m, 14.0, 2.0) == pytest.approx(1.0)
        assert relative_likelihood(m, 14.0, 3.1) < 1.0

    def test_relative_likelihood_checks_domain(self):
        with pytest.raises(DomainError):
            relative_likelihood(GammaScale(7), 14.0, -1.0)


class TestPolarStats:
    def test_hand_oracle(self):
        g, u = polar_stats(np.array([0.0, np.pi / 2.0]))
        assert g == pytest.approx(np.pi / 4.0)
        assert u == pytest.approx(np.cos(np.pi / 4.0))

    def test_accepts_angles_data(self):
        data = AnglesData(angles=[0.0, np.pi / 2.0], kappa=1.0)
        assert polar_stats(data)[0] == pytest.approx(np.pi / 4.0)

    def test_result_in_standard_range(self):
        g, _ = polar_stats(np.array([-0.3, -0.4]))
        assert 0.0 <= g < 2.0 * np.pi

    def test_antipodal_pair_degenerate(self):
        with pytest.raises(DegenerateDataError):
            polar_stats(np.array([0.0, np.pi]))


class TestBFProfile:
    def test_zero_at_observed_difference(self):
        phi_hat = LEHMANN_TRAVEL.mean2 - LEHMANN_TRAVEL.mean1
        assert bf_profile_rloglik(LEHMANN_TRAVEL, phi_hat) == pytest.approx(
            0.0, abs=1e-10)

    def test_nonpositive_everywhere(self):
        phis = np.linspace(-6.0, 4.0, 41)
        assert np.all(bf_profile_rloglik(LEHMANN_TRAVEL, phis) <= 1e-12)

    @pytest.mark.parametrize("phi", [-3.0, -1.444, 0.5, 2.0])
    def test_matches_numeric_profile(self, phi):
        # independently profile the group-1 mean with a bounded minimizer
        d = LEHMANN_TRAVEL
        a, b = d.mean1, d.mean2 - phi

        def f(t):
            return (d.n1 * np.log(d.ss1 + d.n1 * (a - t) ** 2)
                    + d.n2 * np.log(d.ss2 + d.n2 * (b - t) ** 2))

        lo, hi = min(a, b) - 1e-9, max(a, b) + 1e-9
        res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12})
        expect = -0.5 * (f(res.x) - d.n1 * np.log(d.ss1) - d.n2 * np.log(d.ss2))
        assert bf_profile_rloglik(d, phi) == pytest.approx(expect, abs=1e-8)

    def test_fit_consistent_with_rloglik(self):
        d = LEHMANN_TRAVEL
        t, v1, v2 = bf_profile_fit(d, -2.0)
        q1 = d.ss1 + d.n1 * (d.mean1 - t) ** 2
        q2 = d.ss2 + d.n2 * (d.mean2 + 2.0 - t) ** 2
        assert v1 == pytest.approx(q1 / d.n1, abs=1e-12)
        assert v2 == pytest.approx(q2 / d.n2, abs=1e-12)
        expect = -0.5 * (d.n1 * np.log(q1 / d.ss1) + d.n2 * np.log(q2 / d.ss2))
        assert bf_profile_rloglik(d, -2.0) == pytest.approx(expect, abs=1e-12)


class TestData:
    def test_bfdata_validation(self):
        with pytest.raises(InvalidParameterError):
            BFData(n1=1, mean1=0.0, sd1=1.0, n2=5, mean2=0.0, sd2=1.0)
        with pytest.raises(InvalidParameterError):
            BFData(n1=3, mean1=0.0, sd1=0.0, n2=5, mean2=0.0, sd2=1.0)

    def test_sum_of_squares(self):
        d = BFData(n1=5, mean1=0.0, sd1=2.0, n2=3, mean2=0.0, sd2=1.5)
        assert d.ss1 == pytest.approx(16.0)
        assert d.ss2 == pytest.approx(4.5)

    def test_lehmann_travel_summary(self):
        d = LEHMANN_TRAVEL
        assert (d.n1, d.n2) == (5, 11)
        assert d.mean2 - d.mean1 == pytest.approx(-1.444)

    def test_angles_data_wraps_modulo(self):
        data = AnglesData(angles=[-np.pi / 2.0], kappa=1.0)
        assert data.angles[0] == pytest.approx(1.5 * np.pi)

    def test_angles_data_validation(self):
        with pytest.raises(InvalidParameterError):
            AnglesData(angles=[], kappa=1.0)
        with pytest.raises(InvalidParameterError):
            AnglesData(angles=[0.1], kappa=0.0)


class TestLoaders:
    def test_angles_roundtrip(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("angle\n0.5\n1.25\n")
        data = load_angles_csv(p, kappa=4.0)
        np.testing.assert_allclose(data.angles, [0.5, 1.25])
        assert data.kappa == 4.0

    def test_angles_missing_column(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("theta\n0.5\n")
        with pytest.raises(DatasetError):
            load_angles_csv(p, kappa=1.0)

    def test_pairs_roundtrip(self, tmp_path):
        p = tmp_path / "p.csv"
        p.write_text("x1,x2\n1.0,2.0\n3.0,4.0\n")
        out = load_pairs_csv(p)
        np.testing.assert_allclose(out, [[1.0, 2.0], [3.0, 4.0]])

    def test_values_roundtrip(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("value\n1.5\n2.5\n")
        np.testing.assert_allclose(load_values_csv(p), [1.5, 2.5])

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_values_csv(tmp_path / "nope.csv")

    def test_non_numeric_cell(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("value\noops\n")
        with pytest.raises(DatasetError):
            load_values_csv(p)

    def test_header_but_no_rows(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("value\n")
        with pytest.raises(DatasetError):
            load_values_csv(p)
