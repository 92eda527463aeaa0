"""Figure rendering for the report commands.

Every report writes its numbers to CSV first; the figures here are
side-by-side visual companions saved next to those files.  All entry
points take explicit data arrays so they stay trivially testable and
never recompute anything.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_contour_figure",
    "save_coverage_figure",
    "save_curves_figure",
    "save_ecdf_figure",
    "save_trend_figure",
]

_DIAG_KW = {"color": "0.55", "linestyle": "--", "linewidth": 1.0, "zorder": 1}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_contour_figure(path, thetas, values, xlabel="theta", title=None):
    """Plausibility contour over a 1-D grid."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(np.asarray(thetas), np.asarray(values), color="C0")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("plausibility")
    ax.set_ylim(-0.02, 1.05)
    if title:
        ax.set_title(title)
    _finish(fig, path)


def save_ecdf_figure(path, values, ks=None, title="validity"):
    """ECDF of contour values at the truth against the uniform diagonal."""
    vals = np.sort(np.asarray(values, dtype=float))
    ecdf = np.arange(1, vals.size + 1) / vals.size
    fig, ax = plt.subplots(figsize=(4.2, 4.0))
    ax.plot([0, 1], [0, 1], **_DIAG_KW)
    ax.step(vals, ecdf, where="post", color="C0")
    ax.set_xlabel("contour value at truth")
    ax.set_ylabel("empirical CDF")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    label = title if ks is None else f"{title} (KS = {ks:.4f})"
    ax.set_title(label)
    _finish(fig, path)


def save_curves_figure(path, curves, xlabel="alpha", ylabel="fraction",
                       diagonal="up", title=None):
    """Overlay of (alpha, value) curves.

    curves is a sequence of (label, alphas, values) triples. diagonal
    selects the reference line drawn underneath: "up" for the uniform
    diagonal, "down" for the 1 - alpha line, None for none.
    """
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    if diagonal == "up":
        ax.plot([0, 1], [0, 1], **_DIAG_KW)
    elif diagonal == "down":
        ax.plot([0, 1], [1, 0], **_DIAG_KW)
    for i, (label, alphas, values) in enumerate(curves):
        ax.plot(np.asarray(alphas), np.asarray(values),
                marker="o", markersize=3, color=f"C{i}", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    _finish(fig, path)


def save_coverage_figure(path, methods, coverage, coverage_se, target,
                         title="coverage"):
    """Per-method coverage with two-standard-error bars and the target line."""
    methods = list(methods)
    xs = np.arange(len(methods))
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.axhline(target, **_DIAG_KW)
    ax.errorbar(xs, np.asarray(coverage), yerr=2.0 * np.asarray(coverage_se),
                fmt="o", color="C0", capsize=4)
    ax.set_xticks(xs)
    ax.set_xticklabels(methods, rotation=20, ha="right")
    ax.set_ylabel("coverage")
    ax.set_title(title)
    _finish(fig, path)


def save_trend_figure(path, ns, values, ylabel="discrepancy", title=None):
    """Scalar diagnostic against sample size on a log-x axis."""
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.plot(np.asarray(ns), np.asarray(values), marker="o", color="C0")
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(ylabel)
    ax.set_ylim(bottom=0)
    if title:
        ax.set_title(title)
    _finish(fig, path)
