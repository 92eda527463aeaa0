"""Contour builders: Monte Carlo, pivot, conditional, and profile routes.

The generic estimator simulates replicate datasets at the evaluated
parameter and ranks the observed relative likelihood among the
replicates'. Faster routes exist for the gamma scale model (a pivot),
the von Mises mean (a conditional distribution given the resultant
length), and the two-sample normal mean difference (a plug-in
parametric bootstrap of the profile relative likelihood).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import stats

from .contours import PossibilityContour
from .errors import DegenerateDataError, InvalidParameterError
from .models import (
    BFData,
    Model,
    _bf_profile_core,
    bf_profile_fit,
    bf_profile_rloglik,
)
from .util import chi2_sf, derive_rng

__all__ = [
    "MCValue",
    "contour_mc",
    "contour_pivot_gamma",
    "contour_vonmises_cond",
    "contour_bf_profile",
    "contour_bf_profile_grid",
    "contour_grid",
    "gaussian_loc_contour",
    "gamma_scale_contour",
    "vonmises_cond_contour",
    "bf_profile_contour",
]

# Slack for relative-likelihood comparisons in the log domain, so float
# rounding at the maximizer never flips an inclusive tie.
_LOG_TIE = 1e-12


class MCValue(NamedTuple):
    """A Monte Carlo plausibility estimate with its binomial stderr."""

    value: float
    stderr: float


def contour_mc(model: Model, x, theta, M=2000, seed=0, rng=None):
    """Plausibility of theta by ranking the observed relative likelihood.

    Simulates M replicate datasets at theta and returns the fraction
    whose relative likelihood sits at or below the observed one (ties
    count), together with the binomial standard error.
    """
    if M < 100:
        raise InvalidParameterError("M must be at least 100")
    model.check_domain(theta)
    if rng is None:
        rng = derive_rng(seed)
    theta = np.asarray(theta, dtype=float)
    theta_arg = float(theta) if theta.ndim == 0 else theta

    X = model.sample(theta_arg, M, rng)
    r_obs = float(model.log_density(x, theta_arg) - model.log_density(x, model.mle(x)))
    r_rep = model.log_density(X, theta_arg) - model.log_density(X, model.mle(X))
    p = float(np.mean(r_rep <= r_obs + _LOG_TIE))
    return MCValue(p, float(np.sqrt(p * (1.0 - p) / M)))


def contour_pivot_gamma(x, n_shape, theta, pivots):
    """Gamma-scale plausibility through the scale pivot.

    ``pivots`` is a shared set of standard Gamma(n, 1) draws; reusing
    one set across every theta makes the contour smooth in theta and
    exactly scale equivariant. theta may be a scalar or an array.
    """
    x = float(x)
    n = float(n_shape)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise InvalidParameterError("theta must be positive")
    pivots = np.asarray(pivots, dtype=float)

    h_piv = n * np.log(pivots) - pivots
    t_obs = x / theta
    h_obs = n * np.log(t_obs) - t_obs
    out = np.mean(h_piv <= np.expand_dims(h_obs, -1) + _LOG_TIE, axis=-1)
    return float(out) if out.ndim == 0 else out


def contour_vonmises_cond(g, u, kappa, theta):
    """Conditional plausibility of a mean angle given the resultant.

    The observed direction g, given a mean resultant length u, follows a
    von Mises law centered at the true angle with concentration kappa*u.
    The plausibility of theta is the probability that the angular
    deviation exceeds the observed one, 2 F(-|g - theta|) with F the
    centered von Mises CDF.
    """
    if u <= 1e-12:
        raise DegenerateDataError("zero resultant length: conditional model undefined")
    if u > 1.0 + 1e-12:
        raise InvalidParameterError("resultant length cannot exceed 1")
    conc = float(kappa) * float(u)
    theta = np.asarray(theta, dtype=float)
    delta = np.abs((theta - g + np.pi) % (2.0 * np.pi) - np.pi)
    out = 2.0 * stats.vonmises.cdf(-delta, conc)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _bf_standard_draws(rng, M, n1, n2):
    """Standardized replicate material shared across a phi grid."""
    z1 = rng.standard_normal(M)
    z2 = rng.standard_normal(M)
    c1 = rng.chisquare(n1 - 1, size=M)
    c2 = rng.chisquare(n2 - 1, size=M)
    return z1, z2, c1, c2


def _bf_plaus_from_draws(data: BFData, phis, draws):
    """Bootstrap plausibility at each phi from shared standard draws.

    At each phi the replicate datasets are the plug-in constrained MLE
    pushed through the standardized draws: group means are normal around
    the constrained means, sums of squares are scaled chi-squares.
    """
    z1, z2, c1, c2 = draws
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    obs = np.atleast_1d(bf_profile_rloglik(data, phis))
    t, v1, v2 = (np.atleast_1d(v) for v in bf_profile_fit(data, phis))

    mean1 = t[:, None] + np.sqrt(v1 / data.n1)[:, None] * z1[None, :]
    mean2 = (t + phis)[:, None] + np.sqrt(v2 / data.n2)[:, None] * z2[None, :]
    ss1 = v1[:, None] * c1[None, :]
    ss2 = v2[:, None] * c2[None, :]
    rep, _, _, _ = _bf_profile_core(data.n1, ss1, mean1, data.n2, ss2, mean2,
                                    phis[:, None])
    return np.mean(rep <= obs[:, None] + _LOG_TIE, axis=1)


def contour_bf_profile(data: BFData, phi, M=5000, seed=0, rng=None):
    """Plausibility of a mean difference by plug-in bootstrap.

    Simulates M two-sample datasets (through their sufficient
    statistics) at the constrained MLE for this phi, recomputes each
    replicate's profile relative likelihood at phi, and ranks the
    observed value. No replicate can fail: the inner optimum is a
    closed-form cubic, so the dropped-replicate count is always zero.
    """
    if M < 500:
        raise InvalidParameterError("M must be at least 500")
    if rng is None:
        rng = derive_rng(seed)
    draws = _bf_standard_draws(rng, M, data.n1, data.n2)
    p = float(_bf_plaus_from_draws(data, phi, draws)[0])
    return MCValue(p, float(np.sqrt(p * (1.0 - p) / M)))


def contour_bf_profile_grid(data: BFData, phis, M=5000, seed=0, rng=None,
                            nuisance_factors=None):
    """Bootstrap plausibilities on a phi grid with common random numbers.

    One standardized draw set is reused at every grid value, which
    removes grid-to-grid jitter so level sets are well defined.

    ``nuisance_factors`` is a sensitivity escape hatch: when given (for
    example np.geomspace(0.25, 4, 5)), the plug-in variance pair is
    perturbed by each ratio factor and the pointwise maximum plausibility
    over the grid of perturbations is returned instead of the plug-in
    value.
    """
    if rng is None:
        rng = derive_rng(seed)
    phis = np.asarray(phis, dtype=float)
    draws = _bf_standard_draws(rng, M, data.n1, data.n2)
    if not nuisance_factors:
        return _bf_plaus_from_draws(data, phis, draws)

    out = np.zeros(phis.shape)
    for c in nuisance_factors:
        perturbed = _bf_plaus_perturbed(data, phis, draws, float(c))
        out = np.maximum(out, perturbed)
    return out


def _bf_plaus_perturbed(data: BFData, phis, draws, factor):
    """Plausibility with the plug-in variance ratio scaled by factor."""
    z1, z2, c1, c2 = draws
    phis = np.atleast_1d(phis)
    obs = np.atleast_1d(bf_profile_rloglik(data, phis))
    t, v1, v2 = (np.atleast_1d(v) for v in bf_profile_fit(data, phis))
    v1 = v1 * factor
    v2 = v2 / factor
    mean1 = t[:, None] + np.sqrt(v1 / data.n1)[:, None] * z1[None, :]
    mean2 = (t + phis)[:, None] + np.sqrt(v2 / data.n2)[:, None] * z2[None, :]
    ss1 = v1[:, None] * c1[None, :]
    ss2 = v2[:, None] * c2[None, :]
    rep, _, _, _ = _bf_profile_core(data.n1, ss1, mean1, data.n2, ss2, mean2,
                                    phis[:, None])
    return np.mean(rep <= obs[:, None] + _LOG_TIE, axis=1)


# ---------------------------------------------------------------------
# grid evaluation
# ---------------------------------------------------------------------

def contour_grid(builder, grid, mode=None, mode_value=1.0, mc_stderr=None,
                 evaluator=None, support=None):
    """Evaluate a contour builder over a grid and wrap it for reuse.

    ``builder`` maps an array of parameter values to plausibilities (a
    scalar-only builder is looped). The grid must bracket the mode: the
    argmax may not sit on either end. When the exact mode is known it is
    inserted into the cache with ``mode_value`` so cuts collapse to the
    right point as alpha approaches 1. Values are isotonized on each
    side of the mode at construction.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise InvalidParameterError("grid must be a 1-D array with at least 3 points")
    try:
        values = np.asarray(builder(grid), dtype=float)
        if values.shape != grid.shape:
            raise TypeError
    except TypeError:
        values = np.array([float(builder(t)) for t in grid])

    k = int(np.argmax(values))
    if k == 0 or k == grid.size - 1:
        raise InvalidParameterError("mode not bracketed by grid")

    thetas = grid
    if mode is not None:
        m = float(np.atleast_1d(mode)[0])
        if not grid[0] < m < grid[-1]:
            raise InvalidParameterError("mode not bracketed by grid")
        if m not in grid:
            j = int(np.searchsorted(grid, m))
            thetas = np.insert(grid, j, m)
            values = np.insert(values, j, mode_value)
    else:
        mode = thetas[k]

    lo, hi = (float(thetas[0]), float(thetas[-1])) if support is None else support
    return PossibilityContour(evaluator=evaluator, mode=mode,
                              grid=(thetas, values), mc_stderr=mc_stderr,
                              support=(lo, hi))


# ---------------------------------------------------------------------
# ready-made contours for the built-in models
# ---------------------------------------------------------------------

def gaussian_loc_contour(x, var=1.0, span=8.5, num=2001):
    """Exact Gaussian-location contour, cached on x +/- span*sqrt(var)."""
    x = float(x)
    sd = float(np.sqrt(var))

    def ev(theta):
        theta = np.asarray(theta, dtype=float)
        out = chi2_sf((theta - x) ** 2 / var, 1)
        return float(out) if out.ndim == 0 else out

    grid = np.linspace(x - span * sd, x + span * sd, num)
    cont = contour_grid(ev, grid, mode=x, evaluator=ev,
                        support=(-np.inf, np.inf))
    return cont


def gamma_scale_contour(x, n_shape, M=2000, seed=0, num=2001, tail=1e-7):
    """Pivot Monte Carlo gamma-scale contour on a quantile-driven grid."""
    from scipy.special import gammainccinv, gammaincinv

    x = float(x)
    n = float(n_shape)
    rng = derive_rng(seed)
    pivots = rng.gamma(n, 1.0, size=M)
    t_lo = float(gammaincinv(n, tail))
    t_hi = float(gammainccinv(n, tail))
    grid = np.linspace(x / t_hi, x / t_lo, num)

    def ev(theta):
        return contour_pivot_gamma(x, n, theta, pivots)

    return contour_grid(ev, grid, mode=x / n,
                        mc_stderr=0.5 / np.sqrt(M), support=(0.0, np.inf))


def vonmises_cond_contour(g, u, kappa, num=4001):
    """Exact conditional von Mises contour on one period around g."""
    g = float(g)

    def ev(theta):
        return contour_vonmises_cond(g, u, kappa, theta)

    grid = np.linspace(g - np.pi, g + np.pi, num)
    return contour_grid(ev, grid, mode=g, evaluator=ev,
                        support=(g - np.pi, g + np.pi))


def bf_profile_contour(data: BFData, M=5000, seed=0, span=8.0, num=161):
    """Bootstrap profile contour for the mean difference.

    The grid spans the observed difference +/- span standard errors of
    the difference; it widens automatically (up to three doublings) if
    the plausibility at either end has not yet fallen below 0.005.
    """
    phi_hat = data.mean2 - data.mean1
    se = float(np.sqrt(data.sd1**2 / data.n1 + data.sd2**2 / data.n2))
    rng = derive_rng(seed)
    draws = _bf_standard_draws(rng, M, data.n1, data.n2)

    half = span * se
    for _ in range(4):
        grid = np.linspace(phi_hat - half, phi_hat + half, num)
        values = _bf_plaus_from_draws(data, grid, draws)
        if values[0] < 0.005 and values[-1] < 0.005:
            break
        half *= 2.0

    def builder(_):
        return values

    return contour_grid(builder, grid, mode=phi_hat,
                        mc_stderr=0.5 / np.sqrt(M))
