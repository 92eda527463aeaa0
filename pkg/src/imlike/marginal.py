"""Marginalization: extension-principle contours, sample pushforward,
and the calibration curves that separate possibilistic from
probabilistic marginalization.

The extension principle takes a marginal plausibility as the sup of the
joint contour over the map's preimage. On grids the sup is exact up to
bin resolution. Probabilistic pushforward of a calibrated posterior
through a non-linear map generally loses calibration; the curves here
make that loss measurable.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .contours import Ellipsoid, Interval, PossibilityContour
from .errors import InvalidParameterError
from .inner import InnerSampleSet
from .util import chi2_quantile, derive_rng

__all__ = [
    "extension_contour",
    "pushforward",
    "noncredibility_curve",
    "ocd_curve",
    "ocd_study",
    "bounded_map",
]


def extension_contour(joint: PossibilityContour, m, phi_grid):
    """Marginal contour by the extension principle on a grid.

    Each phi grid point owns the bin between the midpoints to its
    neighbors; the marginal plausibility of the point is the max joint
    plausibility among grid thetas whose image lands in the bin. Images
    beyond the outer midpoints accumulate on the end bins. Bins with an
    empty preimage are filled by linear interpolation from their
    neighbors.
    """
    if joint.grid_cache is None:
        raise InvalidParameterError("extension needs a grid-backed joint contour")
    phis = np.asarray(phi_grid, dtype=float)
    if phis.ndim != 1 or phis.size < 3 or np.any(np.diff(phis) <= 0):
        raise InvalidParameterError("phi_grid must be strictly increasing")

    thetas, values = joint.grid_cache
    img = np.asarray(m(thetas), dtype=float)
    edges = 0.5 * (phis[1:] + phis[:-1])
    idx = np.searchsorted(edges, img)

    out = np.full(phis.size, -np.inf)
    np.maximum.at(out, idx, values)

    filled = np.isfinite(out)
    if not np.any(filled):
        raise InvalidParameterError("map image misses the whole phi grid")
    if not np.all(filled):
        out = np.interp(phis, phis[filled], out[filled])

    mode = phis[int(np.argmax(out))]
    return PossibilityContour(mode=mode, grid=(phis, out),
                              mc_stderr=joint.mc_stderr,
                              support=(float(phis[0]), float(phis[-1])))


def pushforward(samples: InnerSampleSet, m):
    """Apply a map to each draw, keeping levels and pseudo flags."""
    thetas = samples.thetas
    arg = thetas[:, 0] if thetas.shape[1] == 1 else thetas
    phi = np.asarray(m(arg), dtype=float)
    return InnerSampleSet(levels=samples.levels, thetas=phi,
                          pseudo=samples.pseudo, seed=samples.seed,
                          provenance=dict(samples.provenance, pushforward=True))


def noncredibility_curve(samples: InnerSampleSet, contour: PossibilityContour,
                         alpha_grid=None):
    """Fraction of sample mass outside each cut, per level.

    For a calibrated (inner) sample the curve sits on the diagonal; a
    curve below the diagonal means the sample concentrates too much
    inside the cuts (over-confidence).
    """
    if alpha_grid is None:
        alpha_grid = np.linspace(0.05, 0.95, 19)
    alpha_grid = np.atleast_1d(np.asarray(alpha_grid, dtype=float))
    pl = np.asarray(contour.evaluate(samples.thetas[:, 0]), dtype=float)
    vals = np.array([np.mean(pl <= a) for a in alpha_grid])
    return alpha_grid, vals


# ---------------------------------------------------------------------
# over-confidence curves
# ---------------------------------------------------------------------

def _image_interval(m, cut, npts=2001):
    """Image of a connected cut under a continuous map, as an interval."""
    if isinstance(cut, Interval):
        pts = np.linspace(cut.a, cut.b, npts)
        vals = np.asarray(m(pts), dtype=float)
    elif isinstance(cut, Ellipsoid):
        center = np.atleast_1d(np.asarray(cut.center, dtype=float))
        if center.size != 2:
            raise InvalidParameterError("ellipsoid cover implemented for 2-D only")
        lam, E = np.linalg.eigh(np.atleast_2d(cut.matrix))
        radii = np.sqrt(cut.radius2 / lam)
        ang = np.linspace(0.0, 2.0 * np.pi, 241)
        frac = np.linspace(0.0, 1.0, 41)
        circ = np.stack([np.cos(ang), np.sin(ang)], axis=-1)      # (A, 2)
        disc = frac[:, None, None] * circ[None, :, :]             # (F, A, 2)
        pts = center + (disc * radii) @ E.T
        vals = np.asarray(m(pts.reshape(-1, 2)), dtype=float)
    else:
        raise InvalidParameterError(f"unsupported cut shape: {type(cut).__name__}")
    return float(np.min(vals)), float(np.max(vals))


def ocd_curve(posterior_sampler, m, cut_for, alpha_grid=None, N=100000,
              rng=None, seed=0):
    """Posterior mass of the image of each joint cut, per level.

    ``posterior_sampler(N, rng)`` draws from the joint posterior,
    ``cut_for(alpha)`` returns the joint cut. Linear maps give the
    diagonal; a curve above the diagonal is the over-confidence
    signature this plot exists to expose.
    """
    if alpha_grid is None:
        alpha_grid = np.linspace(0.05, 0.95, 19)
    alpha_grid = np.atleast_1d(np.asarray(alpha_grid, dtype=float))
    if rng is None:
        rng = derive_rng(seed)
    draws = np.asarray(posterior_sampler(int(N), rng), dtype=float)
    phi = np.asarray(m(draws), dtype=float)
    vals = np.empty(alpha_grid.size)
    for i, a in enumerate(alpha_grid):
        lo, hi = _image_interval(m, cut_for(float(a)))
        vals[i] = np.mean((phi >= lo) & (phi <= hi))
    return alpha_grid, vals


def bounded_map(theta):
    """The clamp onto [-1, 1], the simplest bounded non-linear map."""
    return np.clip(theta, -1.0, 1.0)


def ocd_study(case, x, alpha_grid=None, N=200000, seed=0):
    """The ready-made over-confidence studies on exact Gaussian posteriors.

    ``bounded``: X ~ N(theta, 1) observed once, marginalized through the
    clamp. ``sqnorm``: X ~ N2(theta, I), marginalized through the
    squared norm. ``linear``: the clamp study's control, an affine map
    that preserves calibration exactly.
    """
    if case == "bounded":
        x = float(x)
        sampler = lambda n, rng: rng.normal(x, 1.0, size=n)
        m = bounded_map
        cut_for = lambda a: Interval(x - stats.norm.ppf(1.0 - a / 2.0),
                                     x + stats.norm.ppf(1.0 - a / 2.0))
    elif case == "sqnorm":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size != 2:
            raise InvalidParameterError("sqnorm case needs a 2-vector x")
        sampler = lambda n, rng: x + rng.standard_normal((n, 2))
        m = lambda t: np.sum(np.atleast_2d(t) ** 2, axis=-1)
        cut_for = lambda a: Ellipsoid(center=x, matrix=np.eye(2),
                                      radius2=chi2_quantile(1.0 - a, 2))
    elif case == "linear":
        x = float(x)
        sampler = lambda n, rng: rng.normal(x, 1.0, size=n)
        m = lambda t: 2.0 * t - 1.0
        cut_for = lambda a: Interval(x - stats.norm.ppf(1.0 - a / 2.0),
                                     x + stats.norm.ppf(1.0 - a / 2.0))
    else:
        raise InvalidParameterError(f"unknown study case: {case!r}")
    return ocd_curve(sampler, m, cut_for, alpha_grid=alpha_grid, N=N, seed=seed)
