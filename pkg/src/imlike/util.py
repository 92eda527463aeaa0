"""Shared numeric and plumbing helpers.

Everything here is deliberately small: deterministic RNG stream
derivation, chi-square distribution functions on top of the regularized
incomplete gamma, pool-adjacent-violators isotonic regression, a
vectorized real-cubic-root solver, and CSV emission with a manifest
comment line.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import special

__all__ = [
    "derive_rng",
    "thread_count",
    "chi2_cdf",
    "chi2_sf",
    "chi2_quantile",
    "isotonic",
    "real_cubic_roots",
    "write_csv",
    "read_csv",
    "ks_distance_uniform",
]


def derive_rng(seed, *keys):
    """Return a Generator on a stream derived from (seed, *keys).

    The same (seed, keys) tuple always yields the same stream, no matter
    how many other streams were derived before it, which is what makes
    results independent of scheduling and thread counts.
    """
    entropy = (int(seed),) + tuple(int(k) for k in keys)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def thread_count(default=8):
    """Worker cap honoring the IMLIKE_THREADS environment variable."""
    raw = os.environ.get("IMLIKE_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = default
    if cap < 1:
        cap = 1
    return min(cap, os.cpu_count() or 1)


# ---------------------------------------------------------------------
# chi-square distribution via the regularized incomplete gamma function
# ---------------------------------------------------------------------

def chi2_cdf(q, df):
    return special.gammainc(df / 2.0, np.asarray(q, dtype=float) / 2.0)


def chi2_sf(q, df):
    return special.gammaincc(df / 2.0, np.asarray(q, dtype=float) / 2.0)


def chi2_quantile(p, df):
    """Inverse chi-square CDF (Newton-inverted incomplete gamma)."""
    return 2.0 * special.gammaincinv(df / 2.0, np.asarray(p, dtype=float))


def isotonic(y, increasing=True):
    """Monotone least-squares fit by pool-adjacent-violators.

    Parameters
    ----------
    y : array_like
        Values in grid order.
    increasing : bool
        Direction of the fit.

    Returns
    -------
    np.ndarray of the same length.
    """
    y = np.asarray(y, dtype=float)
    if not increasing:
        return isotonic(y[::-1], increasing=True)[::-1]
    n = len(y)
    blocks = []  # [start_index, weight, mean]
    for i in range(n):
        blocks.append([i, 1.0, y[i]])
        while len(blocks) > 1 and blocks[-2][2] >= blocks[-1][2]:
            s2, w2, m2 = blocks.pop()
            s1, w1, m1 = blocks.pop()
            blocks.append([s1, w1 + w2, (w1 * m1 + w2 * m2) / (w1 + w2)])
    out = np.empty(n)
    for j, (s, w, m) in enumerate(blocks):
        e = blocks[j + 1][0] if j + 1 < len(blocks) else n
        out[s:e] = m
    return out


def real_cubic_roots(c3, c2, c1, c0):
    """Real roots of c3 x^3 + c2 x^2 + c1 x + c0, vectorized.

    Inputs broadcast to a common shape. Returns an array of shape
    (..., 3). Where only one real root exists it is repeated in all
    three slots, so callers can evaluate an objective at every slot and
    take the argmin without masking.

    c3 must be nonzero everywhere (the callers here guarantee it).
    """
    c3, c2, c1, c0 = np.broadcast_arrays(
        *(np.asarray(c, dtype=float) for c in (c3, c2, c1, c0))
    )
    b = c2 / c3
    c = c1 / c3
    d = c0 / c3
    # depressed cubic u^3 + p u + q with x = u - b/3
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0

    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    roots = np.empty(np.broadcast(b, c, d).shape + (3,), dtype=float)

    one = disc > 0.0
    if np.any(one):
        s = np.sqrt(disc[one])
        u = np.cbrt(-q[one] / 2.0 + s) + np.cbrt(-q[one] / 2.0 - s)
        r = u + shift[one]
        roots[one, 0] = r
        roots[one, 1] = r
        roots[one, 2] = r

    three = ~one
    if np.any(three):
        pt = p[three]
        qt = q[three]
        # p <= 0 on this branch, and |q| <= 2 m^3, so arg lands in [-1, 1];
        # the floor in the divisor keeps a triple root (p = q = 0) finite
        m = np.sqrt(np.maximum(-pt / 3.0, 0.0))
        arg = np.clip(-qt / np.maximum(2.0 * m**3, 1e-300), -1.0, 1.0)
        phi = np.arccos(arg)
        for k in range(3):
            roots[three, k] = 2.0 * m * np.cos((phi - 2.0 * np.pi * k) / 3.0) + shift[three]

    return roots


def ks_distance_uniform(values):
    """Exact sup distance between the ECDF of values and Unif(0,1)."""
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    if n == 0:
        raise ValueError("empty sample")
    hi = np.arange(1, n + 1) / n - v
    lo = v - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))


# ---------------------------------------------------------------------
# CSV plumbing
# ---------------------------------------------------------------------

def write_csv(path, header, rows, comment=None):
    """Write a comma-delimited UTF-8 file, optional leading # comment."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if comment:
            fh.write("# " + comment + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def read_csv(path):
    """Read back a file written by write_csv: (header, array)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = lines[0].split(",")
    if len(lines) == 1:
        return header, np.empty((0, len(header)))
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, data
