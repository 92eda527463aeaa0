"""Possibility kernel: contours, maxitive evaluation, alpha-cuts.

A possibility contour is a pointwise plausibility function over the
parameter space whose supremum is 1 at the maximum-likelihood point.
Upper level sets of the contour ("alpha-cuts") are the confidence
regions everything else in the package is calibrated against. The
Gaussian possibility function and the empirical probability-to-
possibility transform live here too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .util import chi2_sf, isotonic

__all__ = [
    "PossibilityContour",
    "AlphaCut",
    "Interval",
    "Ellipsoid",
    "GaussianPossibilityParams",
    "gaussian_contour",
    "alpha_cut_1d",
    "possibility_of_set",
    "prob_to_poss_empirical",
]


@dataclass(frozen=True)
class Interval:
    """A one-dimensional cut [a, b]."""

    a: float
    b: float


@dataclass(frozen=True)
class Ellipsoid:
    """Quadratic-form cut {theta: (theta-center)' matrix (theta-center) <= radius2}."""

    center: np.ndarray
    matrix: np.ndarray
    radius2: float


@dataclass(frozen=True)
class AlphaCut:
    """An upper level set of a contour at a given plausibility level.

    ``unbounded_low``/``unbounded_high`` flag the pseudo case where the
    contour never drops below alpha on that side of the mode within the
    searchable range, so the reported endpoint is the range boundary
    rather than a true crossing.
    """

    alpha: float
    shape: object
    unbounded_low: bool = False
    unbounded_high: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidParameterError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class GaussianPossibilityParams:
    """Mean vector and SPD covariance of a Gaussian possibility function."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        if cov.shape != (mean.size, mean.size):
            raise InvalidParameterError("cov shape does not match mean length")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise InvalidParameterError("cov must be symmetric positive-definite")


class PossibilityContour:
    """A plausibility function with a known mode.

    Parameters
    ----------
    evaluator : callable or None
        Vectorized map from parameter values to plausibilities in [0, 1].
        When None, evaluation interpolates the grid cache.
    mode : float or array
        Point where the plausibility equals 1.
    grid : (thetas, values) or None
        Sorted 1-D cache. Values are clipped to [0, 1] and isotonized on
        each side of the mode at construction, since raw Monte Carlo
        values would otherwise break cut nesting.
    mc_stderr : float or None
        Monte Carlo standard error of the cached values, if they came
        from simulation.
    support : (lo, hi)
        Range outside which the contour is not defined (or is zero);
        used to clamp unbounded cuts.
    """

    def __init__(self, evaluator=None, mode=None, grid=None, mc_stderr=None,
                 support=(-np.inf, np.inf)):
        if evaluator is None and grid is None:
            raise InvalidParameterError("need an evaluator or a grid cache")
        self.evaluator = evaluator
        self.mode = np.asarray(mode, dtype=float) if mode is not None else None
        self.mc_stderr = mc_stderr
        self.support = (float(support[0]), float(support[1]))
        self._grid_theta = None
        self._grid_value = None
        if grid is not None:
            thetas, values = grid
            thetas = np.asarray(thetas, dtype=float)
            values = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
            order = np.argsort(thetas)
            thetas, values = thetas[order], values[order]
            if mode is None:
                k = int(np.argmax(values))
                self.mode = np.asarray(thetas[k])
            k = int(np.searchsorted(thetas, float(self.mode)))
            left = isotonic(values[:k], increasing=True)
            right = isotonic(values[k:], increasing=False)
            self._grid_theta = thetas
            self._grid_value = np.concatenate([left, right])
        if self.mode is None:
            raise InvalidParameterError("mode is required when no grid is given")

    @property
    def grid_cache(self):
        if self._grid_theta is None:
            return None
        return self._grid_theta, self._grid_value

    def __call__(self, theta):
        return self.evaluate(theta)

    def evaluate(self, theta):
        if self.evaluator is not None:
            return self.evaluator(theta)
        theta = np.asarray(theta, dtype=float)
        return np.interp(theta, self._grid_theta, self._grid_value)

    def dim(self):
        return int(np.atleast_1d(self.mode).size)


def gaussian_contour(y, params: GaussianPossibilityParams):
    """Plausibility of y under a Gaussian possibility function.

    Returns 1 - F_D(q) where q is the Mahalanobis quadratic form of y
    around the mean and F_D the chi-square(D) distribution function.
    Accepts a single point or an array of points in the last axis.
    """
    mean = params.mean
    d = mean.size
    y = np.asarray(y, dtype=float)
    diff = np.atleast_2d(y).reshape(-1, d) - mean
    sol = np.linalg.solve(params.cov, diff.T).T
    q = np.einsum("ij,ij->i", diff, sol)
    out = chi2_sf(q, d)
    if y.ndim <= 1 and y.size == d:
        return float(out[0])
    return out.reshape(y.shape[:-1] if y.ndim > 1 else y.shape)


def _invert_branch(thetas, values, alpha, left):
    """Interpolated solution of contour == alpha on one monotone branch."""
    if left:
        lo = values[0]
        if alpha < lo:
            return float(thetas[0]), True
        return float(np.interp(alpha, values, thetas)), False
    lo = values[-1]
    if alpha < lo:
        return float(thetas[-1]), True
    # reverse so the plausibility axis is increasing for interp
    return float(np.interp(alpha, values[::-1], thetas[::-1])), False


def alpha_cut_1d(contour: PossibilityContour, alpha: float, tol: float = 1e-6):
    """Endpoints of the upper level set {theta: contour(theta) > alpha}.

    Uses monotone interpolation of the grid cache when one is attached
    (the cache is isotonized at construction so both branches invert
    cleanly), otherwise bisection outward from the mode after bracketing
    by doubling. Sides where the contour never drops below alpha within
    the support come back flagged as unbounded with the boundary as
    endpoint.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must be in (0, 1), got {alpha}")
    mode = float(np.atleast_1d(contour.mode)[0])

    if contour.grid_cache is not None:
        thetas, values = contour.grid_cache
        k = int(np.searchsorted(thetas, mode))
        a, unb_lo = _invert_branch(thetas[: k + 1], values[: k + 1], alpha, left=True)
        b, unb_hi = _invert_branch(thetas[k:], values[k:], alpha, left=False)
        return AlphaCut(alpha, Interval(min(a, mode), max(b, mode)),
                        unbounded_low=unb_lo, unbounded_high=unb_hi)

    def crossing(direction):
        lo, hi = contour.support
        bound = hi if direction > 0 else lo
        step = max(abs(mode), 1.0) * 1e-3
        inner = mode
        outer = mode + direction * step
        # bracket by doubling until the contour drops below alpha
        while True:
            if (direction > 0 and outer >= bound) or (direction < 0 and outer <= bound):
                outer = bound if np.isfinite(bound) else mode + direction * 1e12
                if float(contour.evaluate(outer)) > alpha:
                    return outer, True
                break
            if float(contour.evaluate(outer)) <= alpha:
                break
            inner = outer
            outer = mode + direction * (abs(outer - mode) * 2.0)
        # bisect to theta tolerance
        while abs(outer - inner) > tol:
            mid = 0.5 * (inner + outer)
            if float(contour.evaluate(mid)) > alpha:
                inner = mid
            else:
                outer = mid
        return 0.5 * (inner + outer), False

    b, unb_hi = crossing(+1)
    a, unb_lo = crossing(-1)
    return AlphaCut(alpha, Interval(a, b), unbounded_low=unb_lo, unbounded_high=unb_hi)


def possibility_of_set(contour: PossibilityContour, region):
    """sup of the contour over a finite grid of parameter points.

    The empty region evaluates to 0 (a vacuous hypothesis).
    """
    region = np.asarray(region, dtype=float)
    if region.size == 0:
        return 0.0
    return float(np.max(contour.evaluate(region)))


def prob_to_poss_empirical(density_at_samples, density_at_theta):
    """Fraction of sampled density values at or below the target's.

    This is the empirical probability-to-possibility transform: with
    samples drawn from the probability being transformed, it converges
    to the plausibility the tightest outer possibilistic approximation
    assigns to theta.
    """
    d = np.asarray(density_at_samples, dtype=float)
    if d.size == 0:
        raise InvalidParameterError("empty sample set")
    return float(np.mean(d <= float(density_at_theta)))
