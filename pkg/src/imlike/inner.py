"""Samplers for the inner probabilistic approximation.

In one dimension the construction is exact: draw a level uniformly,
then put mass w on the lower endpoint of that level's cut and 1 - w on
the upper. In higher dimensions the cuts are bounded by level-dependent
ellipsoids (the observed information embellished by a per-axis sigma
vector, fitted by stochastic approximation), and draws are uniform on
the ellipsoid boundary in the pushforward-of-the-sphere sense.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contours import PossibilityContour, alpha_cut_1d
from .engine import contour_mc
from .errors import ConvergenceError, InvalidParameterError
from .models import Model
from .util import chi2_quantile, derive_rng, write_csv, read_csv

__all__ = [
    "SAConfig",
    "SigmaFit",
    "SigmaTable",
    "InnerSampleSet",
    "DEFAULT_ALPHA_GRID",
    "sample_inner_1d",
    "weight_curve",
    "embellish_info",
    "fit_sigma",
    "fit_sigma_table",
    "sample_boundary",
    "sample_inner_md",
]

DEFAULT_ALPHA_GRID = np.round(np.linspace(0.05, 0.95, 19), 2)


@dataclass
class SAConfig:
    """Stochastic-approximation settings for sigma fitting.

    The step sequence is w_t = step_c / (t + step_t0), which diverges in
    sum and is square-summable for any step_c > 0, step_t0 >= 1. The
    default step_c is larger than the local plausibility-vs-sigma slope
    would classically suggest because the recursion must burn off its
    cold-start bias within max_iter iterations; see fit_sigma.
    ``mc_size`` is the replicate count of each Monte Carlo contour
    evaluation inside the loop.
    """

    step_c: float = 4.0
    step_t0: float = 5.0
    epsilon: float = 1e-3
    max_iter: int = 200
    sigma0: np.ndarray | None = None
    mc_size: int = 2000

    def __post_init__(self):
        if self.step_c <= 0:
            raise InvalidParameterError("step_c must be positive")
        if self.step_t0 < 1:
            raise InvalidParameterError("step_t0 must be at least 1")
        if self.epsilon <= 0 or self.max_iter < 1:
            raise InvalidParameterError("epsilon and max_iter must be positive")

    def step(self, t):
        return self.step_c / (t + self.step_t0)


@dataclass(frozen=True)
class SigmaFit:
    """Result of one sigma fit: the vector, convergence, and cost."""

    sigma: np.ndarray
    alpha: float
    converged: bool
    iterations: int
    contour_evals: int


@dataclass(frozen=True)
class SigmaTable:
    """Per-level sigma vectors with monotone linear interpolation."""

    alpha_grid: np.ndarray
    sigma: np.ndarray
    converged: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha_grid, dtype=float)
        s = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        c = np.asarray(self.converged, dtype=bool)
        if np.any(np.diff(a) <= 0):
            raise InvalidParameterError("alpha grid must be strictly increasing")
        if np.any(s <= 0):
            raise InvalidParameterError("sigma entries must be positive")
        if s.shape[0] != a.size or c.size != a.size:
            raise InvalidParameterError("table rows must match the alpha grid")
        object.__setattr__(self, "alpha_grid", a)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "converged", c)

    @property
    def dim(self):
        return self.sigma.shape[1]

    def interpolate(self, levels):
        """Per-coordinate linear interpolation, clamped at the grid ends.

        Levels below the smallest grid alpha reuse its sigma: the
        corresponding cuts are the largest, so clamping preserves the
        conservative direction.
        """
        levels = np.atleast_1d(np.asarray(levels, dtype=float))
        out = np.empty((levels.size, self.dim))
        for d in range(self.dim):
            out[:, d] = np.interp(levels, self.alpha_grid, self.sigma[:, d])
        return out

    def to_csv(self, path, comment=None):
        header = ["alpha"] + [f"sigma_{d+1}" for d in range(self.dim)]
        rows = np.column_stack([self.alpha_grid, self.sigma])
        write_csv(path, header, rows, comment=comment)

    @classmethod
    def from_csv(cls, path):
        header, data = read_csv(path)
        if not header or header[0] != "alpha":
            raise InvalidParameterError(f"{path} is not a sigma table")
        return cls(alpha_grid=data[:, 0], sigma=data[:, 1:],
                   converged=np.ones(data.shape[0], dtype=bool))


@dataclass(frozen=True)
class InnerSampleSet:
    """Draws of the inner approximation: one level and one point each.

    ``pseudo`` marks draws whose cut never closed on the chosen side
    within the contour's support, so the emitted point is the support
    boundary rather than a true cut endpoint.
    """

    levels: np.ndarray
    thetas: np.ndarray
    pseudo: np.ndarray
    seed: int | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        thetas = np.asarray(self.thetas, dtype=float)
        if thetas.ndim == 1:
            thetas = thetas[:, None]
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "levels", np.asarray(self.levels, dtype=float))
        object.__setattr__(self, "pseudo", np.asarray(self.pseudo, dtype=bool))

    @property
    def dim(self):
        return self.thetas.shape[1]

    def to_csv(self, path, comment=None):
        header = ["level"] + [f"theta_{d+1}" for d in range(self.dim)]
        rows = np.column_stack([self.levels, self.thetas])
        write_csv(path, header, rows, comment=comment)


# ---------------------------------------------------------------------
# exact one-dimensional sampler
# ---------------------------------------------------------------------

def _cut_endpoints_vectorized(contour: PossibilityContour, levels):
    """Cut endpoints for many levels at once via the monotone cache."""
    thetas, values = contour.grid_cache
    mode = float(np.atleast_1d(contour.mode)[0])
    k = int(np.searchsorted(thetas, mode))
    tl, vl = thetas[: k + 1], values[: k + 1]
    tr, vr = thetas[k:], values[k:]

    a = np.interp(levels, vl, tl)
    pseudo_lo = levels < vl[0]
    a = np.where(pseudo_lo, tl[0], a)

    b = np.interp(levels, vr[::-1], tr[::-1])
    pseudo_hi = levels < vr[-1]
    b = np.where(pseudo_hi, tr[-1], b)
    return a, b, pseudo_lo, pseudo_hi


def sample_inner_1d(contour: PossibilityContour, N, w=0.5, rng=None, seed=0):
    """Two-step draws: a uniform level, then one endpoint of its cut.

    ``w`` is the probability of emitting the lower endpoint; it may be a
    scalar or a callable of the level (values are clipped into [0, 1]).
    Draws whose cut is unbounded on the chosen side are clamped to the
    support boundary and marked pseudo.
    """
    if rng is None:
        rng = derive_rng(seed)
    N = int(N)
    levels = rng.uniform(size=N)
    side_u = rng.uniform(size=N)

    if callable(w):
        w_at = np.clip(np.asarray(w(levels), dtype=float), 0.0, 1.0)
    else:
        if not 0.0 <= w <= 1.0:
            raise InvalidParameterError("w must lie in [0, 1]")
        w_at = np.full(N, float(w))

    if contour.grid_cache is not None:
        a, b, pseudo_lo, pseudo_hi = _cut_endpoints_vectorized(contour, levels)
    else:
        a = np.empty(N)
        b = np.empty(N)
        pseudo_lo = np.zeros(N, dtype=bool)
        pseudo_hi = np.zeros(N, dtype=bool)
        for i in range(N):
            cut = alpha_cut_1d(contour, float(levels[i]))
            a[i], b[i] = cut.shape.a, cut.shape.b
            pseudo_lo[i] = cut.unbounded_low
            pseudo_hi[i] = cut.unbounded_high

    lower = side_u < w_at
    theta = np.where(lower, a, b)
    pseudo = np.where(lower, pseudo_lo, pseudo_hi)
    return InnerSampleSet(levels=levels, thetas=theta, pseudo=pseudo,
                          provenance={"sampler": "two-step-1d"})


def _lower_slope(contour: PossibilityContour, a, b):
    """Contour slope at the lower cut endpoint a.

    With an exact evaluator a central difference at step 1e-5 of the cut
    width suffices. A Monte Carlo grid cache is a different animal: that
    step lands inside one grid cell and returns the cell secant, which
    is dominated by the handful of pivots that cross the cell, so there
    the slope is a least-squares fit over a 10%-of-width window on the
    lower branch.
    """
    if contour.evaluator is not None:
        h = 1e-5 * max(b - a, 1e-12)
        return (float(contour.evaluate(a + h)) - float(contour.evaluate(a - h))) / (2.0 * h)
    thetas, values = contour.grid_cache
    mode = float(np.atleast_1d(contour.mode)[0])
    w = 0.1 * (b - a)
    sel = (thetas >= a - w) & (thetas <= a + w) & (thetas < mode)
    if np.count_nonzero(sel) < 5:
        k = int(np.searchsorted(thetas, a))
        lo = max(0, k - 3)
        sel = np.zeros(thetas.size, dtype=bool)
        sel[lo: k + 3] = thetas[lo: k + 3] < mode
    return float(np.polyfit(thetas[sel], values[sel], 1)[0])


def weight_curve(posterior_density, contour: PossibilityContour, alpha_grid):
    """Level-dependent lower-endpoint weight matching a target posterior.

    At each alpha the weight is the posterior density at the lower cut
    endpoint divided by the contour's slope there, the mass-balance rate
    at which the target posterior spills past the lower endpoint as the
    level falls. Levels where the slope is numerically zero come back as
    nan (undefined, skipped).
    """
    alpha_grid = np.atleast_1d(np.asarray(alpha_grid, dtype=float))
    out = np.full(alpha_grid.shape, np.nan)
    for i, alpha in enumerate(alpha_grid):
        cut = alpha_cut_1d(contour, float(alpha))
        if cut.unbounded_low:
            continue
        a, b = cut.shape.a, cut.shape.b
        slope = _lower_slope(contour, a, b)
        if slope < 1e-12:
            continue
        out[i] = float(posterior_density(a)) / slope
    return out


# ---------------------------------------------------------------------
# multi-dimensional stitched-Gaussian sampler
# ---------------------------------------------------------------------

def embellish_info(J, sigma):
    """Rescale an SPD information matrix along its own eigenaxes.

    With J = E diag(lambda) E', returns E diag(lambda / sigma^2) E', so
    the s-th principal axis of the induced ellipsoid stretches by
    sigma_s while the orientation is preserved.
    """
    J = np.atleast_2d(np.asarray(J, dtype=float))
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if np.any(sigma <= 0):
        raise InvalidParameterError("sigma entries must be positive")
    lam, E = np.linalg.eigh((J + J.T) / 2.0)
    if np.any(lam <= 0):
        raise InvalidParameterError("J must be symmetric positive-definite")
    if sigma.size != lam.size:
        raise InvalidParameterError("sigma length must match the dimension")
    return (E * (lam / sigma**2)) @ E.T


def sample_boundary(theta_hat, J_sigma, alpha, rng=None, seed=0):
    """One point uniform (in the sphere-pushforward sense) on the
    boundary of the Gaussian level-set ellipsoid at level alpha."""
    if rng is None:
        rng = derive_rng(seed)
    theta_hat = np.atleast_1d(np.asarray(theta_hat, dtype=float))
    d = theta_hat.size
    lam, E = np.linalg.eigh(np.atleast_2d(np.asarray(J_sigma, dtype=float)))
    if np.any(lam <= 0):
        raise InvalidParameterError("J_sigma must be symmetric positive-definite")
    z = rng.standard_normal(d)
    z /= np.linalg.norm(z)
    r = np.sqrt(chi2_quantile(1.0 - alpha, d))
    inv_half = (E / np.sqrt(lam)) @ E.T
    return theta_hat + r * (inv_half @ z)


def _representative_points(theta_hat, lam, E, sigma, alpha):
    """The 2D on-boundary axis points of the sigma-stretched ellipsoid."""
    d = theta_hat.size
    r = np.sqrt(chi2_quantile(1.0 - alpha, d))
    offsets = (sigma * r / np.sqrt(lam)) * E  # column s: sigma_s r / sqrt(lam_s) e_s
    pts = np.concatenate([theta_hat[None, :] + offsets.T,
                          theta_hat[None, :] - offsets.T], axis=0)
    return pts


def _clamp_to_domain(model, points):
    """Pull points just outside the open parameter domain back inside."""
    pts = points.copy()
    for dcoord, (lo, hi) in enumerate(model.param_domain):
        col = pts[:, dcoord]
        if np.isfinite(lo):
            eps = 1e-10 * max(1.0, abs(lo)) + 1e-10
            col = np.maximum(col, lo + eps)
        if np.isfinite(hi):
            eps = 1e-10 * max(1.0, abs(hi)) + 1e-10
            col = np.minimum(col, hi - eps)
        pts[:, dcoord] = col
    return pts


def fit_sigma(model: Model, x, alpha, config: SAConfig | None = None,
              contour_evals_budget=None, rng=None, seed=0):
    """Per-axis cut stretch factors by stochastic approximation.

    Iterates sigma_s <- sigma_s + w_t * (max plausibility at the two
    s-axis boundary points - alpha): when the stretched ellipsoid still
    cuts through plausibility above alpha at its axis points it grows,
    otherwise it shrinks. Stops when the largest sigma update drops
    below epsilon, the iteration cap, or the contour-evaluation budget.
    """
    if config is None:
        config = SAConfig()
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError("alpha must be in (0, 1)")
    if rng is None:
        rng = derive_rng(seed)

    theta_hat = np.atleast_1d(np.asarray(model.mle(x), dtype=float))
    d = theta_hat.size
    J = model.observed_info(x, theta_hat if d > 1 else float(theta_hat[0]))
    lam, E = np.linalg.eigh(np.atleast_2d(J))

    sigma = (np.ones(d) if config.sigma0 is None
             else np.atleast_1d(np.asarray(config.sigma0, dtype=float)).copy())
    if sigma.size != d or np.any(sigma <= 0):
        raise InvalidParameterError("sigma0 must be a positive length-D vector")

    evals = 0
    converged = False
    t = 0
    for t in range(1, config.max_iter + 1):
        if contour_evals_budget is not None and evals + 2 * d > contour_evals_budget:
            break
        pts = _representative_points(theta_hat, lam, E, sigma, alpha)
        pts = _clamp_to_domain(model, pts)
        plaus = np.empty(2 * d)
        for i, p in enumerate(pts):
            plaus[i] = contour_mc(model, x, p if d > 1 else float(p[0]),
                                  M=config.mc_size, rng=rng).value
        evals += 2 * d
        g = np.maximum(plaus[:d], plaus[d:]) - alpha
        update = config.step(t) * g
        sigma = np.maximum(sigma + update, 1e-3)
        if np.max(np.abs(update)) < config.epsilon:
            converged = True
            break

    return SigmaFit(sigma=sigma, alpha=float(alpha), converged=converged,
                    iterations=t, contour_evals=evals)


def fit_sigma_table(model: Model, x, alpha_grid=None, config: SAConfig | None = None,
                    rng=None, seed=0, warm_start=True):
    """Fit sigma on a level grid, warm-starting each level from its
    neighbor (largest alpha first: its cut is smallest and closest to
    the all-ones start)."""
    if alpha_grid is None:
        alpha_grid = DEFAULT_ALPHA_GRID
    if config is None:
        config = SAConfig()
    if rng is None:
        rng = derive_rng(seed)
    alpha_grid = np.asarray(alpha_grid, dtype=float)

    order = np.argsort(alpha_grid)[::-1]
    d = np.atleast_1d(np.asarray(model.mle(x), dtype=float)).size
    sig = np.empty((alpha_grid.size, d))
    conv = np.zeros(alpha_grid.size, dtype=bool)
    carry = config.sigma0
    for idx in order:
        cfg = SAConfig(step_c=config.step_c, step_t0=config.step_t0,
                       epsilon=config.epsilon, max_iter=config.max_iter,
                       sigma0=carry, mc_size=config.mc_size)
        fit = fit_sigma(model, x, float(alpha_grid[idx]), config=cfg, rng=rng)
        sig[idx] = fit.sigma
        conv[idx] = fit.converged
        if warm_start:
            carry = fit.sigma
    return SigmaTable(alpha_grid=alpha_grid, sigma=sig, converged=conv)


def sample_inner_md(model: Model, x, N, alpha_grid=None, config: SAConfig | None = None,
                    rng=None, seed=0, sigma_table: SigmaTable | None = None,
                    allow_nonconverged=False):
    """Stitched-Gaussian inner draws: uniform level, then a point on the
    sigma-stretched information ellipsoid boundary for that level.

    A prefitted ``sigma_table`` skips the stochastic-approximation stage
    (the expensive part); otherwise one is fitted first from the same
    rng stream.
    """
    if rng is None:
        rng = derive_rng(seed)
    if sigma_table is None:
        sigma_table = fit_sigma_table(model, x, alpha_grid=alpha_grid,
                                      config=config, rng=rng)
    if not allow_nonconverged and not bool(np.all(sigma_table.converged)):
        bad = np.asarray(sigma_table.alpha_grid)[~sigma_table.converged]
        raise ConvergenceError(
            f"sigma fit did not converge at levels {np.round(bad, 3)}",
            payload=sigma_table)

    theta_hat = np.atleast_1d(np.asarray(model.mle(x), dtype=float))
    d = theta_hat.size
    J = model.observed_info(x, theta_hat if d > 1 else float(theta_hat[0]))
    lam, E = np.linalg.eigh(np.atleast_2d(J))

    N = int(N)
    levels = rng.uniform(size=N)
    z = rng.standard_normal(size=(N, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)

    sig = sigma_table.interpolate(levels)            # (N, d)
    # a level of exactly 0 would put the boundary at infinity
    r = np.sqrt(chi2_quantile(1.0 - np.clip(levels, 1e-12, 1.0), d))
    w = z @ E                                        # rows: E' z
    v = sig * w / np.sqrt(lam)
    pts = theta_hat[None, :] + r[:, None] * (v @ E.T)
    return InnerSampleSet(levels=levels, thetas=pts,
                          pseudo=np.zeros(N, dtype=bool),
                          provenance={"sampler": "stitched-gaussian"})
