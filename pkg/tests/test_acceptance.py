"""End-to-end acceptance gate.

Nine release criteria, one test each, every test printing a single
PASS/FAIL line with the measured numbers (run with ``pytest -s`` to see
the lines as they complete). The heavy items are the full two-sample
coverage table and the shape-scale stretch fits; the whole file runs in
about six minutes on one core.
"""

import time

import numpy as np
from scipy import stats

from imlike.cli import main as cli_main
from imlike.diagnostics import bf_coverage_table, bvm_check, validity_sim
from imlike.engine import (
    contour_mc,
    gamma_scale_contour,
    gaussian_loc_contour,
    vonmises_cond_contour,
)
from imlike.inner import (
    SAConfig,
    InnerSampleSet,
    fit_sigma,
    fit_sigma_table,
    sample_inner_1d,
    sample_inner_md,
    weight_curve,
)
from imlike.marginal import extension_contour, noncredibility_curve, ocd_study, pushforward
from imlike.models import GammaScale, GammaShapeScale, GaussianLocation
from imlike.util import chi2_quantile, derive_rng


def _verdict(num, name, ok, detail):
    word = "PASS" if ok else "FAIL"
    print(f"[{word}] {num} {name}: {detail}")
    assert ok, f"{num} {name}: {detail}"


def _ecdf_sup(draws, cdf):
    """Two-sided sup distance between an empirical CDF and a target."""
    xs = np.sort(draws)
    n = xs.size
    hi = np.arange(1, n + 1) / n
    f = cdf(xs)
    return float(np.max(np.maximum(np.abs(hi - f), np.abs(hi - 1.0 / n - f))))


def _gamma_weight_interp(contour, n_shape, x):
    posterior = stats.invgamma(n_shape, scale=x)
    grid = np.linspace(0.01, 0.99, 99)
    vals = weight_curve(posterior.pdf, contour, grid)
    ok = np.isfinite(vals)
    return lambda a: np.interp(a, grid[ok], vals[ok]), grid, vals, ok


def test_01_validity_uniformity():
    t0 = time.perf_counter()
    ks_gauss = validity_sim(GaussianLocation(var=1.0), 0.0,
                            reps=2000, M=2000, seed=3).ks
    ks_gamma = validity_sim(GammaScale(n_shape=7), 2.0,
                            reps=2000, M=2000, seed=4).ks
    dt = time.perf_counter() - t0
    ok = ks_gauss <= 0.035 and ks_gamma <= 0.035 and dt <= 60
    _verdict("01", "plausibility-at-truth uniformity", ok,
             f"KS gaussian {ks_gauss:.4f}, gamma {ks_gamma:.4f} "
             f"(tol 0.035), {dt:.1f}s")


def test_02_gamma_noncredibility_diagonal():
    t0 = time.perf_counter()
    contour = gamma_scale_contour(14.0, 7, M=20000, seed=5)
    N = 10000

    half = sample_inner_1d(contour, N, w=0.5, rng=derive_rng(5, 1))
    wfn, _, _, _ = _gamma_weight_interp(contour, 7, 14.0)
    curve = sample_inner_1d(contour, N, w=wfn, rng=derive_rng(5, 2))
    post = stats.invgamma.rvs(7, scale=14.0, size=N,
                              random_state=derive_rng(5, 3))
    post_set = InnerSampleSet(levels=np.asarray(contour.evaluate(post)),
                              thetas=post, pseudo=np.zeros(N, dtype=bool))

    devs = {}
    for name, samples in [("half", half), ("curve", curve),
                          ("posterior", post_set)]:
        alphas, vals = noncredibility_curve(samples, contour)
        devs[name] = float(np.max(np.abs(vals - alphas)))
    dt = time.perf_counter() - t0
    ok = all(d <= 0.02 for d in devs.values()) and dt <= 120
    _verdict("02", "inner-sampler non-credibility on the diagonal", ok,
             f"max dev half {devs['half']:.4f}, curve {devs['curve']:.4f}, "
             f"posterior {devs['posterior']:.4f} (tol 0.02), {dt:.1f}s")


def test_03_weighted_sampler_matches_posterior_cdf():
    t0 = time.perf_counter()
    contour = gamma_scale_contour(14.0, 7, M=20000, seed=5)
    posterior = stats.invgamma(7, scale=14.0)
    wfn, _, _, _ = _gamma_weight_interp(contour, 7, 14.0)
    draws = sample_inner_1d(contour, 10000, w=wfn,
                            rng=derive_rng(9, 2)).thetas[:, 0]
    sup = _ecdf_sup(draws, posterior.cdf)
    dt = time.perf_counter() - t0
    ok = sup <= 0.03 and dt <= 120
    _verdict("03", "matched-weight draws reproduce the posterior", ok,
             f"ECDF sup distance {sup:.4f} (tol 0.03), {dt:.1f}s")


def test_04_weight_curve_constants():
    gauss = gaussian_loc_contour(0.7, var=2.0)
    gw = weight_curve(stats.norm(0.7, np.sqrt(2.0)).pdf, gauss,
                      np.linspace(0.05, 0.95, 19))
    gauss_dev = float(np.max(np.abs(gw - 0.5)))

    contour = gamma_scale_contour(14.0, 7, M=20000, seed=5)
    _, grid, vals, okmask = _gamma_weight_interp(contour, 7, 14.0)
    w_half = float(np.interp(0.5, grid[okmask], vals[okmask]))

    ok = gauss_dev <= 1e-3 and abs(w_half - 0.45) <= 0.02
    _verdict("04", "endpoint-weight constants", ok,
             f"gaussian max |w - 1/2| {gauss_dev:.2e} (tol 1e-3), "
             f"gamma w(0.5) {w_half:.4f} (0.45 +/- 0.02)")


def test_05_two_sample_coverage_table():
    bands = {"im": (0.884, 0.924), "welch": (0.861, 0.901),
             "jeffreys": (0.841, 0.881), "right-haar": (0.909, 0.949)}

    t0 = time.perf_counter()
    table = bf_coverage_table(reps=2000, seed=7)
    dt_full = time.perf_counter() - t0

    cov = {r.method: r.coverage for r in table.rows}
    length = {r.method: r.mean_length for r in table.rows}
    in_band = {m: bands[m][0] <= cov[m] <= bands[m][1] for m in bands}
    ordered = (length["jeffreys"] < length["im"]
               and length["jeffreys"] < length["welch"]
               and length["im"] < length["right-haar"]
               and length["welch"] < length["right-haar"])

    # the fast profile must land in widened bands
    t0 = time.perf_counter()
    smoke = bf_coverage_table(reps=200, seed=7)
    dt_smoke = time.perf_counter() - t0
    smoke_ok = all(
        abs(smoke.row(m).coverage - 0.5 * (lo + hi)) <= 0.07
        for m, (lo, hi) in bands.items())

    ok = (all(in_band.values()) and ordered and table.failures == 0
          and smoke_ok and dt_full <= 3600 and dt_smoke <= 300)
    cov_txt = ", ".join(f"{m} {cov[m]:.4f}" for m in bands)
    len_txt = ", ".join(f"{length[m]:.3f}" for m in
                        ("jeffreys", "welch", "im", "right-haar"))
    _verdict("05", "mean-difference coverage table", ok,
             f"coverage {cov_txt}; lengths (jeffreys,welch,im,right-haar) "
             f"{len_txt}; full {dt_full:.0f}s, smoke {dt_smoke:.0f}s")


def test_06_gaussian_limit_trend():
    t0 = time.perf_counter()
    discs = []
    for n in (20, 80, 320):
        model = GammaShapeScale(n=n)
        x = model.sample((7.0, 3.0), 1, derive_rng(200, n))[0]
        theta_hat = np.atleast_1d(model.mle(x))
        J = model.observed_info(x, theta_hat)
        rng = derive_rng(201, n)
        table = fit_sigma_table(model, x, rng=rng)
        draws = sample_inner_md(model, x, 10000, sigma_table=table, rng=rng)
        discs.append(bvm_check(draws, theta_hat, J))
    dt = time.perf_counter() - t0
    ok = (discs[0] > discs[1] > discs[2] and discs[2] <= 0.05 and dt <= 600)
    _verdict("06", "inner draws merge with the Gaussian limit", ok,
             f"discrepancy at n=20/80/320: {discs[0]:.4f}/{discs[1]:.4f}/"
             f"{discs[2]:.4f} (decreasing, last <= 0.05), {dt:.1f}s")


def test_07_marginalization_dichotomy():
    t0 = time.perf_counter()
    g, u, kappa = 1.35, 0.87, 4.0
    joint = vonmises_cond_contour(g, u, kappa)
    inner = sample_inner_1d(joint, 10000, w=0.5, rng=derive_rng(21))
    phi_grid = np.linspace(-1.0, 1.0, 513)

    # a monotone-enough map keeps the pushforward on the diagonal
    marg_cos = extension_contour(joint, np.cos, phi_grid)
    alphas, vals = noncredibility_curve(pushforward(inner, np.cos), marg_cos)
    cos_dev = float(np.max(np.abs(vals - alphas)))

    # the folding map breaks the probabilistic pushforward
    m15 = lambda t: np.cos(1.5 * t)
    marg_15 = extension_contour(joint, m15, phi_grid)
    bayes_phi = m15(derive_rng(22).vonmises(g, kappa * u, 20000))
    bayes = InnerSampleSet(levels=np.zeros(bayes_phi.size),
                           thetas=bayes_phi,
                           pseudo=np.zeros(bayes_phi.size, dtype=bool))
    alphas, bvals = noncredibility_curve(bayes, marg_15)
    bayes_dip = float(np.max(alphas - bvals))

    # while the pseudo-inner draws on the marginal contour recover it
    pseudo = sample_inner_1d(marg_15, 10000, w=0.5, rng=derive_rng(23))
    alphas, pvals = noncredibility_curve(pseudo, marg_15)
    sel = alphas >= 0.3
    pseudo_dev = float(np.max(np.abs(pvals[sel] - alphas[sel])))

    dt = time.perf_counter() - t0
    ok = (cos_dev <= 0.03 and bayes_dip >= 0.05 and pseudo_dev <= 0.03
          and dt <= 300)
    _verdict("07", "possibilistic vs probabilistic marginalization", ok,
             f"cos pushforward dev {cos_dev:.4f} (tol 0.03), cos(1.5t) "
             f"Bayes dip {bayes_dip:.4f} (>= 0.05), pseudo-inner dev at "
             f"alpha>=0.3 {pseudo_dev:.4f} (tol 0.03), {dt:.1f}s")


def test_08_overconfidence_curves():
    t0 = time.perf_counter()
    a, v = ocd_study("bounded", 2.0, seed=1)
    bounded_over = float(np.max(v - (1.0 - a)))
    a, v = ocd_study("sqnorm", (0.1, 3.0), seed=2)
    sqnorm_over = float(np.max(v - (1.0 - a)))
    a, v = ocd_study("linear", 2.0, seed=3)
    linear_dev = float(np.max(np.abs(v - (1.0 - a))))
    dt = time.perf_counter() - t0
    ok = (bounded_over >= 0.05 and sqnorm_over >= 0.05
          and linear_dev <= 0.02 and dt <= 60)
    _verdict("08", "pushforward over-confidence curves", ok,
             f"bounded +{bounded_over:.4f}, sqnorm +{sqnorm_over:.4f} "
             f"(>= 0.05), linear dev {linear_dev:.4f} (tol 0.02), {dt:.1f}s")


def test_09_stretch_fitting_correctness():
    t0 = time.perf_counter()

    # the Gaussian ellipsoid needs no stretching at any level
    table = fit_sigma_table(GaussianLocation(var=1.0), 0.7,
                            config=SAConfig(mc_size=4000),
                            rng=derive_rng(30))
    gauss_worst = float(np.max(np.abs(table.sigma[:, 0] - 1.0)))
    gauss_ok = bool(table.converged.all()) and gauss_worst <= 0.05

    # shape-scale: fitted boundary points carry plausibility alpha
    model = GammaShapeScale(n=2000)
    x = model.sample((7.0, 3.0), 1, derive_rng(50, 2000))[0]
    theta_hat = np.atleast_1d(model.mle(x))
    J = model.observed_info(x, theta_hat)
    lam, E = np.linalg.eigh(J)

    rep_worst = 0.0
    fit_half = None
    for a in (0.1, 0.5, 0.9):
        fit = fit_sigma(model, x, a, config=SAConfig(mc_size=8000),
                        rng=derive_rng(61, int(a * 100)))
        if a == 0.5:
            fit_half = fit
        r = np.sqrt(chi2_quantile(1.0 - a, 2))
        offsets = (fit.sigma * r / np.sqrt(lam)) * E
        pts = np.concatenate([theta_hat[None, :] + offsets.T,
                              theta_hat[None, :] - offsets.T], axis=0)
        for i, p in enumerate(pts):
            val = contour_mc(model, x, p, M=20000,
                             rng=derive_rng(62, int(a * 100), i)).value
            rep_worst = max(rep_worst, abs(val - a))
    rep_ok = rep_worst <= 0.02

    # no plausibility above alpha outside the stretched cut
    alpha = 0.5
    rng = derive_rng(63)
    z = rng.standard_normal((1000, 2))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    f = 1.02 + np.abs(rng.normal(0.0, 0.4, size=1000))
    r = np.sqrt(chi2_quantile(1.0 - alpha, 2))
    v = fit_half.sigma * (z @ E) / np.sqrt(lam)
    pts = theta_hat + f[:, None] * r * (v @ E.T)
    worst_slack = -np.inf
    for i, pt in enumerate(pts):
        mc = contour_mc(model, x, pt, M=500, rng=derive_rng(64, i))
        worst_slack = max(worst_slack, mc.value - (alpha + 3.0 * mc.stderr))
    incl_ok = worst_slack <= 0.0

    dt = time.perf_counter() - t0
    ok = gauss_ok and rep_ok and incl_ok and dt <= 300
    _verdict("09", "per-axis stretch fitting", ok,
             f"gaussian worst |sigma-1| {gauss_worst:.4f} (tol 0.05), "
             f"boundary plausibility worst |dev| {rep_worst:.4f} (tol 0.02), "
             f"exterior slack {worst_slack:+.4f} (<= 0), {dt:.1f}s")


def test_smoke_cli_coverage_profile(tmp_path, capsys):
    """The documented fast profile of the coverage study, end to end."""
    t0 = time.perf_counter()
    rc = cli_main(["report", "coverage-bf", "--reps", "200", "--seed", "7",
                   "--out-dir", str(tmp_path)])
    dt = time.perf_counter() - t0
    assert rc == 0
    assert (tmp_path / "coverage_bf.csv").exists()
    assert (tmp_path / "coverage_bf.png").exists()
    assert dt <= 300
