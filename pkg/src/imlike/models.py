"""Parametric models and their likelihood machinery.

Five concrete models: Gaussian location (known variance), gamma scale
(known shape), von Mises mean angle (known concentration), bivariate
normal correlation (known means and variances), and the two-sample
normal problem for a difference of means with unequal variances, which
enters through its profile relative likelihood over sufficient
statistics.

Conventions
-----------
Every model broadcasts: ``log_density`` accepts a single dataset or a
stack of datasets on axis 0, and a single parameter or a matching stack.
``mle`` accepts the same stacking. Datasets are scalars for the Gaussian
location and gamma scale models, an (n,) array for the gamma
shape-scale model, and an (n, 2) array for the correlation model.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import (
    ConvergenceError,
    DatasetError,
    DegenerateDataError,
    DomainError,
    InvalidParameterError,
)
from .util import real_cubic_roots

__all__ = [
    "Model",
    "GaussianLocation",
    "GammaScale",
    "VonMisesMean",
    "Correlation",
    "GammaShapeScale",
    "BFData",
    "AnglesData",
    "LEHMANN_TRAVEL",
    "relative_likelihood",
    "polar_stats",
    "bf_profile_rloglik",
    "bf_profile_fit",
    "fit_mle",
    "observed_info",
    "load_angles_csv",
    "load_pairs_csv",
    "load_values_csv",
]


# ---------------------------------------------------------------------
# data containers
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class BFData:
    """Two-sample summary statistics.

    Standard deviations use the n-1 divisor. Only summaries are stored
    because they are sufficient under the normal model.
    """

    n1: int
    mean1: float
    sd1: float
    n2: int
    mean2: float
    sd2: float

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise InvalidParameterError("group sizes must be at least 2")
        if self.sd1 <= 0 or self.sd2 <= 0:
            raise InvalidParameterError("standard deviations must be positive")

    @property
    def ss1(self):
        return (self.n1 - 1) * self.sd1**2

    @property
    def ss2(self):
        return (self.n2 - 1) * self.sd2**2


LEHMANN_TRAVEL = BFData(n1=5, mean1=7.580, sd1=2.237, n2=11, mean2=6.136, sd2=0.073)


@dataclass(frozen=True)
class AnglesData:
    """Angles in radians plus the known von Mises concentration."""

    angles: np.ndarray
    kappa: float

    def __post_init__(self):
        angles = np.atleast_1d(np.asarray(self.angles, dtype=float))
        if angles.size == 0:
            raise InvalidParameterError("angles must be nonempty")
        object.__setattr__(self, "angles", np.mod(angles, 2.0 * np.pi))
        if self.kappa <= 0:
            raise InvalidParameterError("kappa must be positive")


# ---------------------------------------------------------------------
# model contract
# ---------------------------------------------------------------------

class Model(abc.ABC):
    """A parametric model with enough structure to build IM contours."""

    dim: int
    param_domain: tuple

    @abc.abstractmethod
    def log_density(self, x, theta):
        ...

    @abc.abstractmethod
    def sample(self, theta, count, rng):
        """count independent datasets drawn at theta, stacked on axis 0."""

    @abc.abstractmethod
    def mle(self, x):
        ...

    def check_domain(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        for d, (lo, hi) in enumerate(self.param_domain):
            td = theta[..., d] if theta.ndim > 1 else theta[d]
            if np.any(td <= lo) or np.any(td >= hi):
                raise DomainError(
                    f"parameter {d} outside open interval ({lo}, {hi})")

    def observed_info(self, x, theta_hat):
        """Negative Hessian of the log-likelihood by central differences.

        Models with analytic curvature override this. The result is
        symmetrized and checked for positive definiteness.
        """
        theta_hat = np.atleast_1d(np.asarray(theta_hat, dtype=float))
        d = theta_hat.size
        h = np.maximum(1e-5, 1e-5 * np.abs(theta_hat))
        H = np.empty((d, d))

        def f(t):
            return float(self.log_density(x, t if d > 1 else t[0]))

        for i in range(d):
            ei = np.zeros(d)
            ei[i] = h[i]
            H[i, i] = (f(theta_hat + ei) - 2.0 * f(theta_hat) + f(theta_hat - ei)) / h[i] ** 2
            for j in range(i + 1, d):
                ej = np.zeros(d)
                ej[j] = h[j]
                H[i, j] = H[j, i] = (
                    f(theta_hat + ei + ej) - f(theta_hat + ei - ej)
                    - f(theta_hat - ei + ej) + f(theta_hat - ei - ej)
                ) / (4.0 * h[i] * h[j])
        J = -(H + H.T) / 2.0
        try:
            np.linalg.cholesky(J)
        except np.linalg.LinAlgError:
            raise InvalidParameterError("observed information is not positive-definite")
        return J


class GaussianLocation(Model):
    """X ~ N(theta, var) with known variance, one observation."""

    dim = 1

    def __init__(self, var=1.0):
        if var <= 0:
            raise InvalidParameterError("var must be positive")
        self.var = float(var)
        self.param_domain = ((-np.inf, np.inf),)

    def log_density(self, x, theta):
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return -0.5 * np.log(2.0 * np.pi * self.var) - (x - theta) ** 2 / (2.0 * self.var)

    def sample(self, theta, count, rng):
        return rng.normal(float(theta), np.sqrt(self.var), size=count)

    def mle(self, x):
        x = np.asarray(x, dtype=float)
        return float(x) if x.ndim == 0 else x.copy()

    def observed_info(self, x, theta_hat):
        return np.array([[1.0 / self.var]])


class GammaScale(Model):
    """X ~ Gamma(shape=n, scale=theta) with known integer shape."""

    dim = 1

    def __init__(self, n_shape):
        if n_shape <= 0:
            raise InvalidParameterError("shape must be positive")
        self.n = float(n_shape)
        self.param_domain = ((0.0, np.inf),)

    def log_density(self, x, theta):
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        n = self.n
        return (n - 1.0) * np.log(x) - n * np.log(theta) - x / theta - special.gammaln(n)

    def sample(self, theta, count, rng):
        return rng.gamma(self.n, float(theta), size=count)

    def mle(self, x):
        x = np.asarray(x, dtype=float) / self.n
        return float(x) if x.ndim == 0 else x

    def observed_info(self, x, theta_hat):
        th = float(np.atleast_1d(theta_hat)[0])
        return np.array([[2.0 * float(x) / th**3 - self.n / th**2]])


class VonMisesMean(Model):
    """n angles from a von Mises law with unknown mean, known kappa."""

    dim = 1

    def __init__(self, kappa, n=25):
        if kappa <= 0:
            raise InvalidParameterError("kappa must be positive")
        self.kappa = float(kappa)
        self.n = int(n)
        self.param_domain = ((-np.inf, np.inf),)

    def log_density(self, x, theta):
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        k = self.kappa
        n = x.shape[-1]
        c = np.sum(np.cos(x), axis=-1)
        s = np.sum(np.sin(x), axis=-1)
        log_i0 = np.log(special.i0e(k)) + k
        return k * (c * np.cos(theta) + s * np.sin(theta)) - n * (np.log(2.0 * np.pi) + log_i0)

    def sample(self, theta, count, rng):
        return rng.vonmises(float(theta), self.kappa, size=(count, self.n))

    def mle(self, x):
        x = np.asarray(x, dtype=float)
        return np.arctan2(np.mean(np.sin(x), axis=-1), np.mean(np.cos(x), axis=-1)) % (2.0 * np.pi)

    def observed_info(self, x, theta_hat):
        x = np.asarray(x, dtype=float)
        g, u = polar_stats(x)
        return np.array([[self.kappa * x.shape[-1] * u]])


class Correlation(Model):
    """Bivariate normal with zero means, unit variances, correlation theta."""

    dim = 1

    def __init__(self, n=10):
        self.n = int(n)
        self.param_domain = ((-1.0, 1.0),)

    @staticmethod
    def _stats(x):
        x = np.asarray(x, dtype=float)
        s11 = np.sum(x[..., 0] ** 2, axis=-1)
        s22 = np.sum(x[..., 1] ** 2, axis=-1)
        s12 = np.sum(x[..., 0] * x[..., 1], axis=-1)
        return s11, s22, s12

    def log_density(self, x, theta):
        s11, s22, s12 = self._stats(x)
        n = np.asarray(x).shape[-2]
        r = np.asarray(theta, dtype=float)
        om = 1.0 - r**2
        return (-n * np.log(2.0 * np.pi) - 0.5 * n * np.log(om)
                - (s11 - 2.0 * r * s12 + s22) / (2.0 * om))

    def sample(self, theta, count, rng):
        r = float(theta)
        z = rng.standard_normal(size=(count, self.n, 2))
        out = np.empty_like(z)
        out[..., 0] = z[..., 0]
        out[..., 1] = r * z[..., 0] + np.sqrt(1.0 - r**2) * z[..., 1]
        return out

    def mle(self, x):
        s11, s22, s12 = self._stats(x)
        n = np.asarray(x).shape[-2]
        return _corr_mle_from_stats(s11, s22, s12, n)

    # observed_info inherited (finite differences)


def _corr_mle_from_stats(s11, s22, s12, n):
    """Correlation MLE: best real root in (-1, 1) of the score cubic."""
    s11, s22, s12 = np.broadcast_arrays(
        np.asarray(s11, float), np.asarray(s22, float), np.asarray(s12, float))
    roots = real_cubic_roots(n, -s12, s11 + s22 - n, -s12)
    r = np.clip(roots, -1.0 + 1e-10, 1.0 - 1e-10)
    om = 1.0 - r**2
    ll = -0.5 * n * np.log(om) - (s11[..., None] - 2.0 * r * s12[..., None]
                                  + s22[..., None]) / (2.0 * om)
    best = np.argmax(ll, axis=-1)
    out = np.take_along_axis(r, best[..., None], axis=-1)[..., 0]
    if out.ndim == 0:
        return float(out)
    return out


class GammaShapeScale(Model):
    """n iid gamma observations with unknown shape and scale."""

    dim = 2

    def __init__(self, n=20):
        self.n = int(n)
        self.param_domain = ((0.0, np.inf), (0.0, np.inf))

    def log_density(self, x, theta):
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        a = theta[..., 0]
        s = theta[..., 1]
        n = x.shape[-1]
        slog = np.sum(np.log(x), axis=-1)
        ssum = np.sum(x, axis=-1)
        return ((a - 1.0) * slog - ssum / s - n * a * np.log(s)
                - n * special.gammaln(a))

    def sample(self, theta, count, rng):
        a, s = float(theta[0]), float(theta[1])
        return rng.gamma(a, s, size=(count, self.n))

    def mle(self, x):
        x = np.asarray(x, dtype=float)
        mlog = np.mean(np.log(x), axis=-1)
        mx = np.mean(x, axis=-1)
        a = _gamma_shape_mle(np.log(mx) - mlog)
        s = mx / a
        out = np.stack([a, s], axis=-1)
        return out if out.ndim > 1 else out.reshape(2)

    def observed_info(self, x, theta_hat):
        a, s = float(theta_hat[0]), float(theta_hat[1])
        n = np.asarray(x).shape[-1]
        sx = float(np.sum(x))
        return np.array([
            [n * special.polygamma(1, a), n / s],
            [n / s, 2.0 * sx / s**3 - n * a / s**2],
        ])


def _gamma_shape_mle(delta, max_iter=100):
    """Solve log(a) - digamma(a) = delta by Newton steps in log a."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0):
        raise DegenerateDataError("constant data: gamma shape diverges")
    a = (3.0 - delta + np.sqrt((delta - 3.0) ** 2 + 24.0 * delta)) / (12.0 * delta)
    for _ in range(max_iter):
        g = np.log(a) - special.digamma(a) - delta
        # derivative with respect to log a
        dg = 1.0 - a * special.polygamma(1, a)
        step = g / dg
        a = a * np.exp(-step)
        if np.max(np.abs(g)) < 1e-13:
            break
    else:
        raise ConvergenceError("gamma shape Newton did not converge", payload=a)
    return a


# ---------------------------------------------------------------------
# likelihood operations
# ---------------------------------------------------------------------

def relative_likelihood(model: Model, x, theta):
    """Likelihood at theta divided by its maximum over the parameter."""
    model.check_domain(theta)
    ld = model.log_density(x, np.asarray(theta, dtype=float))
    ld_hat = model.log_density(x, model.mle(x))
    return np.exp(ld - ld_hat)


def fit_mle(model: Model, x):
    """Maximum-likelihood estimate for one dataset (or a stack)."""
    return model.mle(x)


def observed_info(model: Model, x, theta_hat):
    """Negative log-likelihood Hessian at theta_hat, D x D."""
    return model.observed_info(x, theta_hat)


def polar_stats(data):
    """Mean direction and mean resultant length of a set of angles.

    Returns (G, U) with G in [0, 2*pi) and U in [0, 1]. Perfectly
    dispersed angles (U = 0) leave the mean direction undefined.
    """
    angles = data.angles if isinstance(data, AnglesData) else np.asarray(data, dtype=float)
    c = float(np.mean(np.cos(angles)))
    s = float(np.mean(np.sin(angles)))
    u = float(np.hypot(c, s))
    if u < 1e-12:
        raise DegenerateDataError("zero resultant length: mean angle undefined")
    g = float(np.arctan2(s, c)) % (2.0 * np.pi)
    return g, u


# ---------------------------------------------------------------------
# two-sample normal profile likelihood
# ---------------------------------------------------------------------

def _bf_profile_core(n1, ss1, mean1, n2, ss2, mean2, phi):
    """Constrained-optimum pieces for a mean difference phi.

    All arguments broadcast. Returns (logR, t, v1, v2): the log relative
    profile likelihood, the optimal group-1 mean, and the two
    constrained variance estimates.

    The inner optimization over the group-1 mean t has stationary points
    at the real roots of a cubic; every stationary point lies between
    the two mean anchors a = mean1 and b = mean2 - phi, and the global
    optimum is taken by evaluating the objective at each real root.
    """
    n1 = float(n1)
    n2 = float(n2)
    a, b, ss1, ss2 = np.broadcast_arrays(
        np.asarray(mean1, float), np.asarray(mean2, float) - np.asarray(phi, float),
        np.asarray(ss1, float), np.asarray(ss2, float))

    c3 = -n1 * n2 * (n1 + n2) * np.ones_like(a)
    c2 = n1 * n2 * ((n1 + 2.0 * n2) * a + (2.0 * n1 + n2) * b)
    c1 = -(n1**2 * ss2 + n2**2 * ss1
           + n1 * n2 * (2.0 * a * b * (n1 + n2) + n1 * b**2 + n2 * a**2))
    c0 = (n1**2 * ss2 * a + n2**2 * ss1 * b
          + n1 * n2 * a * b * (n1 * b + n2 * a))

    t = real_cubic_roots(c3, c2, c1, c0)
    q1 = ss1[..., None] + n1 * (a[..., None] - t) ** 2
    q2 = ss2[..., None] + n2 * (b[..., None] - t) ** 2
    f = n1 * np.log(q1) + n2 * np.log(q2)
    best = np.argmin(f, axis=-1)[..., None]
    t_opt = np.take_along_axis(t, best, axis=-1)[..., 0]
    q1_opt = np.take_along_axis(q1, best, axis=-1)[..., 0]
    q2_opt = np.take_along_axis(q2, best, axis=-1)[..., 0]

    log_r = -0.5 * n1 * np.log(q1_opt / ss1) - 0.5 * n2 * np.log(q2_opt / ss2)
    return log_r, t_opt, q1_opt / n1, q2_opt / n2


def bf_profile_rloglik(data: BFData, phi):
    """Log relative profile likelihood of the mean difference.

    Nonpositive everywhere, zero exactly at phi = mean2 - mean1. Accepts
    a scalar or an array of phi values.
    """
    log_r, _, _, _ = _bf_profile_core(
        data.n1, data.ss1, data.mean1, data.n2, data.ss2, data.mean2, phi)
    if np.ndim(phi) == 0:
        return float(log_r)
    return log_r


def bf_profile_fit(data: BFData, phi):
    """Constrained MLE under the mean-difference constraint.

    Returns (mu1, var1, var2) maximizing the likelihood subject to
    mean2 - mean1 = phi; the plug-in used by the bootstrap contour.
    """
    _, t, v1, v2 = _bf_profile_core(
        data.n1, data.ss1, data.mean1, data.n2, data.ss2, data.mean2, phi)
    if np.ndim(phi) == 0:
        return float(t), float(v1), float(v2)
    return t, v1, v2


# ---------------------------------------------------------------------
# dataset ingestion
# ---------------------------------------------------------------------

def load_angles_csv(path, kappa):
    """AnglesData from a CSV with one column named angle."""
    try:
        header, data = _read_table(path)
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}")
    if "angle" not in header:
        raise DatasetError(f"{path} has no 'angle' column")
    return AnglesData(angles=data[:, header.index("angle")], kappa=kappa)


def load_values_csv(path, column="value"):
    """1-D float array from a CSV with the named column."""
    try:
        header, data = _read_table(path)
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}")
    if column not in header:
        raise DatasetError(f"{path} has no '{column}' column")
    return data[:, header.index(column)]


def load_pairs_csv(path):
    """(n, 2) array from a CSV with columns x1, x2."""
    try:
        header, data = _read_table(path)
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}")
    for col in ("x1", "x2"):
        if col not in header:
            raise DatasetError(f"{path} has no '{col}' column")
    return np.column_stack([data[:, header.index("x1")], data[:, header.index("x2")]])


def _read_table(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise DatasetError(f"{path} is empty")
    header = [c.strip() for c in lines[0].split(",")]
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise DatasetError(f"{path}: non-numeric cell ({exc})")
    if data.size == 0:
        raise DatasetError(f"{path} has a header but no rows")
    return header, data
