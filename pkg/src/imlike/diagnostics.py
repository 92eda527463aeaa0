"""Simulation studies: validity checks, the two-sample coverage table,
comparison posteriors, Gaussian-limit merging, and the folded rank
statistic.

The expensive study is the two-sample mean-difference coverage table.
Replicates are vectorized in chunks: each chunk evaluates the bootstrap
plausibility of every candidate difference for every replicate in one
(chunk, grid, M) pass through the closed-form profile machinery.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .contours import Interval
from .engine import _LOG_TIE, _bf_standard_draws, contour_mc
from .errors import ConvergenceError, DegenerateDataError, InvalidParameterError
from .models import BFData, Model, _bf_profile_core
from .util import (chi2_quantile, derive_rng, isotonic, ks_distance_uniform,
                   thread_count)

__all__ = [
    "ValidityResult",
    "validity_sim",
    "welch_nu",
    "welch_interval",
    "bayes_bf_sample",
    "TABLE1_SETTINGS",
    "CoverageRow",
    "CoverageTable",
    "bf_coverage_table",
    "bvm_check",
    "u_statistic",
    "u_statistic_quadratic",
]


# ---------------------------------------------------------------------
# validity
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ValidityResult:
    """Sorted plausibility-at-truth values and their distance from uniform."""

    values: np.ndarray
    ks: float

    def ecdf(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        return np.searchsorted(self.values, alpha, side="right") / self.values.size


def validity_sim(model: Model, theta_true, reps=2000, M=2000, seed=0):
    """Distribution of the plausibility at the truth under the truth.

    Simulates ``reps`` datasets at theta_true, evaluates the Monte Carlo
    contour there, and reports the sorted values with their KS distance
    from Unif(0,1). Validity says the distribution is stochastically no
    smaller than uniform; for these continuous models it is uniform, so
    the two-sided KS distance is the sharper check.
    """
    if reps < 500:
        raise InvalidParameterError("reps must be at least 500")
    theta_true = np.asarray(theta_true, dtype=float)
    theta_arg = float(theta_true) if theta_true.ndim == 0 else theta_true

    def one(r):
        rng = derive_rng(seed, r)
        x = model.sample(theta_arg, 1, rng)[0]
        return contour_mc(model, x, theta_arg, M=M, rng=rng).value

    values = np.array(_ordered_map(one, range(reps)))
    values.sort()
    return ValidityResult(values=values, ks=ks_distance_uniform(values))


def _ordered_map(fn, items):
    """Map preserving order, threaded when IMLIKE_THREADS allows."""
    workers = thread_count()
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------
# two-sample comparison methods
# ---------------------------------------------------------------------

def welch_nu(data: BFData):
    """Satterthwaite degrees of freedom for the mean difference."""
    g1 = data.sd1**2 / data.n1
    g2 = data.sd2**2 / data.n2
    return (g1 + g2) ** 2 / (g1**2 / (data.n1 - 1) + g2**2 / (data.n2 - 1))


def welch_interval(data: BFData, alpha):
    """Welch two-sided interval for mean2 - mean1."""
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError("alpha must be in (0, 1)")
    se = np.sqrt(data.sd1**2 / data.n1 + data.sd2**2 / data.n2)
    center = data.mean2 - data.mean1
    half = stats.t.ppf(1.0 - alpha / 2.0, welch_nu(data)) * se
    return Interval(center - half, center + half)


def bayes_bf_sample(data: BFData, prior, N, rng=None, seed=0):
    """Posterior draws of the mean difference under a noninformative prior.

    Both priors are flat on the means with independent per-group scale
    priors, so each group mean has an exact Student-t margin:

    - ``right-haar``: per-group 1/sigma prior, mean_i + (sd_i/sqrt n_i) t(n_i-1)
    - ``jeffreys``: per-group independence-Jeffreys 1/sigma^2 prior,
      mean_i + (sqrt(SS_i/n_i)/sqrt n_i) t(n_i)

    The extra prior power shifts both the degrees of freedom and the
    scale (SS/n in place of the unbiased SS/(n-1)), which is what makes
    the Jeffreys intervals the shortest of the methods compared here.
    """
    if rng is None:
        rng = derive_rng(seed)
    N = int(N)
    if prior == "right-haar":
        df1, df2 = data.n1 - 1, data.n2 - 1
        sc1 = data.sd1 / np.sqrt(data.n1)
        sc2 = data.sd2 / np.sqrt(data.n2)
    elif prior == "jeffreys":
        df1, df2 = data.n1, data.n2
        sc1 = np.sqrt(data.ss1 / data.n1) / np.sqrt(data.n1)
        sc2 = np.sqrt(data.ss2 / data.n2) / np.sqrt(data.n2)
    else:
        raise InvalidParameterError(f"unknown prior: {prior!r}")
    t1 = rng.standard_t(df1, size=N)
    t2 = rng.standard_t(df2, size=N)
    return (data.mean2 + sc2 * t2) - (data.mean1 + sc1 * t1)


# ---------------------------------------------------------------------
# coverage table
# ---------------------------------------------------------------------

TABLE1_SETTINGS = {
    "n1": 3, "n2": 20,
    "mean1": 2.0, "var1": 1.0,
    "mean2": 0.0, "var2": 2.0,
}


@dataclass(frozen=True)
class CoverageRow:
    method: str
    coverage: float
    coverage_se: float
    mean_length: float
    length_se: float


@dataclass(frozen=True)
class CoverageTable:
    rows: list
    settings: dict
    reps: int
    alpha: float
    seed: int
    failures: int = 0
    extras: dict = field(default_factory=dict)

    def row(self, method):
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_csv(self, path, comment=None):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if comment:
                fh.write("# " + comment + "\n")
            fh.write("method,coverage,coverage_se,mean_length,length_se\n")
            for r in self.rows:
                fh.write(f"{r.method},{r.coverage:.17g},{r.coverage_se:.17g},"
                         f"{r.mean_length:.17g},{r.length_se:.17g}\n")


def _im_cut_from_grid(phis, pis, alpha):
    """Equal-plausibility interval endpoints from one replicate's grid.

    Values are isotonized on each side of the argmax before inverting,
    the same normalization the reusable contour object applies. Returns
    None when the grid does not bracket the alpha crossing.
    """
    k = int(np.argmax(pis))
    if k == 0 or k == pis.size - 1:
        return None
    left = isotonic(pis[: k + 1], increasing=True)
    right = isotonic(pis[k:], increasing=False)
    if left[0] > alpha or right[-1] > alpha or left[-1] <= alpha:
        return None
    lo = float(np.interp(alpha, left, phis[: k + 1]))
    hi = float(np.interp(alpha, right[::-1], phis[k:][::-1]))
    return lo, hi


def _coverage_chunk(r0, r1, settings, alpha, seed, M, n_post, u_grid):
    """All per-replicate material and intervals for replicates [r0, r1)."""
    n1, n2 = settings["n1"], settings["n2"]
    m01, v01 = settings["mean1"], settings["var1"]
    m02, v02 = settings["mean2"], settings["var2"]
    C = r1 - r0
    P = u_grid.size

    mean1 = np.empty(C); ss1 = np.empty(C)
    mean2 = np.empty(C); ss2 = np.empty(C)
    z1 = np.empty((C, M)); z2 = np.empty((C, M))
    c1 = np.empty((C, M)); c2 = np.empty((C, M))
    q_rh = np.empty((C, 2)); q_j = np.empty((C, 2))

    for i in range(C):
        rng = derive_rng(seed, r0 + i)
        z = rng.standard_normal(2)
        mean1[i] = m01 + z[0] * np.sqrt(v01 / n1)
        mean2[i] = m02 + z[1] * np.sqrt(v02 / n2)
        ss1[i] = v01 * rng.chisquare(n1 - 1)
        ss2[i] = v02 * rng.chisquare(n2 - 1)
        z1[i], z2[i], c1[i], c2[i] = _bf_standard_draws(rng, M, n1, n2)
        data = BFData(n1, mean1[i], np.sqrt(ss1[i] / (n1 - 1)),
                      n2, mean2[i], np.sqrt(ss2[i] / (n2 - 1)))
        q_rh[i] = np.quantile(
            bayes_bf_sample(data, "right-haar", n_post, rng=rng),
            [alpha / 2.0, 1.0 - alpha / 2.0])
        q_j[i] = np.quantile(
            bayes_bf_sample(data, "jeffreys", n_post, rng=rng),
            [alpha / 2.0, 1.0 - alpha / 2.0])

    sd1sq = ss1 / (n1 - 1)
    sd2sq = ss2 / (n2 - 1)
    se = np.sqrt(sd1sq / n1 + sd2sq / n2)
    phi_hat = mean2 - mean1
    phis = phi_hat[:, None] + u_grid[None, :] * se[:, None]       # (C, P)

    obs, t, v1, v2 = _bf_profile_core(
        n1, ss1[:, None], mean1[:, None], n2, ss2[:, None], mean2[:, None], phis)

    bmean1 = t[..., None] + np.sqrt(v1 / n1)[..., None] * z1[:, None, :]
    bmean2 = (t + phis)[..., None] + np.sqrt(v2 / n2)[..., None] * z2[:, None, :]
    bss1 = v1[..., None] * c1[:, None, :]
    bss2 = v2[..., None] * c2[:, None, :]
    rep, _, _, _ = _bf_profile_core(n1, bss1, bmean1, n2, bss2, bmean2,
                                    phis[..., None])
    pis = np.mean(rep <= obs[..., None] + _LOG_TIE, axis=-1)     # (C, P)

    im = np.full((C, 2), np.nan)
    for i in range(C):
        cut = _im_cut_from_grid(phis[i], pis[i], alpha)
        if cut is not None:
            im[i] = cut

    # Welch in closed form
    g1 = sd1sq / n1
    g2 = sd2sq / n2
    nu = (g1 + g2) ** 2 / (g1**2 / (n1 - 1) + g2**2 / (n2 - 1))
    half = stats.t.ppf(1.0 - alpha / 2.0, nu) * se
    welch = np.column_stack([phi_hat - half, phi_hat + half])

    return {"im": im, "welch": welch, "right-haar": q_rh, "jeffreys": q_j}


def bf_coverage_table(settings=None, reps=2000, alpha=0.1, seed=0, M=2000,
                      n_post=2000, span=8.0, num=121, chunk=8):
    """Coverage and mean length of 90%-style intervals for a mean
    difference, under four constructions: the bootstrap-profile cut,
    Welch, and the two noninformative Bayes posteriors.

    Each replicate draws a two-sample dataset through its sufficient
    statistics from its own seed-derived stream, so results do not
    depend on chunking or thread count. Candidate differences live on a
    per-replicate standardized grid phi_hat + u*se with u spanning
    [-span, span]; a replicate whose plausibility never crosses alpha
    inside that grid counts as a failure, and more than 1% failures
    aborts the run.
    """
    if settings is None:
        settings = TABLE1_SETTINGS
    if reps < 100:
        raise InvalidParameterError("reps must be at least 100")
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError("alpha must be in (0, 1)")
    u_grid = np.linspace(-span, span, num)
    phi0 = settings["mean2"] - settings["mean1"]

    starts = list(range(0, reps, chunk))
    chunks = _ordered_map(
        lambda r0: _coverage_chunk(r0, min(r0 + chunk, reps), settings,
                                   alpha, seed, M, n_post, u_grid),
        starts)

    rows = []
    failures = 0
    for method in ("im", "welch", "jeffreys", "right-haar"):
        ends = np.concatenate([c[method] for c in chunks], axis=0)
        ok = ~np.isnan(ends[:, 0])
        if method == "im":
            failures = int(np.sum(~ok))
            if failures > 0.01 * reps:
                raise ConvergenceError(
                    f"{failures} of {reps} replicates failed the cut search",
                    payload=ends)
        lo, hi = ends[ok, 0], ends[ok, 1]
        n_eff = lo.size
        cov = float(np.mean((lo <= phi0) & (phi0 <= hi)))
        lengths = hi - lo
        rows.append(CoverageRow(
            method=method,
            coverage=cov,
            coverage_se=float(np.sqrt(cov * (1.0 - cov) / n_eff)),
            mean_length=float(np.mean(lengths)),
            length_se=float(np.std(lengths, ddof=1) / np.sqrt(n_eff)),
        ))
    return CoverageTable(rows=rows, settings=dict(settings), reps=reps,
                         alpha=alpha, seed=seed, failures=failures)


# ---------------------------------------------------------------------
# Gaussian-limit merging and folded ranks
# ---------------------------------------------------------------------

def bvm_check(samples, theta_hat, J, alpha_grid=None):
    """Sup discrepancy between sample mass of Gaussian cuts and their
    nominal level.

    The cuts are {theta: (theta-theta_hat)' J (theta-theta_hat) <=
    chi2 quantile}; as the sample size grows the inner draws merge with
    N(theta_hat, J^{-1}) and the discrepancy tends to zero.
    """
    if alpha_grid is None:
        alpha_grid = np.linspace(0.05, 0.95, 19)
    thetas = samples.thetas if hasattr(samples, "thetas") else np.atleast_2d(samples)
    theta_hat = np.atleast_1d(np.asarray(theta_hat, dtype=float))
    J = np.atleast_2d(np.asarray(J, dtype=float))
    d = theta_hat.size
    diff = thetas - theta_hat[None, :]
    d2 = np.einsum("ni,ij,nj->n", diff, J, diff)
    worst = 0.0
    for a in np.atleast_1d(alpha_grid):
        inside = float(np.mean(d2 <= chi2_quantile(1.0 - a, d)))
        worst = max(worst, abs(inside - (1.0 - a)))
    return worst


def u_statistic(q):
    """Folded posterior rank 1 - |2q - 1| of a CDF value at the truth."""
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise InvalidParameterError("q must be a CDF value in [0, 1]")
    return 1.0 - abs(2.0 * q - 1.0)


def u_statistic_quadratic(samples, theta_true, mu_hat=None, Sigma_hat=None,
                          log_scale=True):
    """Folded rank of the truth's Mahalanobis score among the samples.

    Multi-parameter version: ranks the quadratic form centered at the
    (by default log-scale) sample moments, then folds as in the scalar
    case. Supply mu_hat/Sigma_hat to use fixed moments instead.
    """
    thetas = samples.thetas if hasattr(samples, "thetas") else np.atleast_2d(samples)
    theta_true = np.atleast_1d(np.asarray(theta_true, dtype=float))
    pts = np.log(thetas) if log_scale else np.asarray(thetas, dtype=float)
    truth = np.log(theta_true) if log_scale else theta_true
    if mu_hat is None:
        mu_hat = pts.mean(axis=0)
    if Sigma_hat is None:
        Sigma_hat = np.cov(pts, rowvar=False).reshape(pts.shape[1], pts.shape[1])
    try:
        L = np.linalg.cholesky(np.atleast_2d(Sigma_hat))
    except np.linalg.LinAlgError:
        raise DegenerateDataError("singular sample covariance") from None
    w = np.linalg.solve(L, (pts - mu_hat).T)
    kappa = np.sum(w**2, axis=0)
    w0 = np.linalg.solve(L, (truth - mu_hat))
    kappa0 = float(np.sum(w0**2))
    q = float(np.mean(kappa <= kappa0))
    return u_statistic(q)
