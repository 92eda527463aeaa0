"""Command-line front end.

Subcommands:

    contour   write a plausibility contour over a grid
    sample    draw from the inner probabilistic approximation
    interval  print alpha-cuts at requested levels (optionally to CSV)
    marginal  extension-principle contour of a derived parameter
    report    the simulation studies: validity, coverage-bf, bvm,
              noncred, ocd; each writes CSVs, figures, and a manifest

Every output CSV starts with a comment carrying the tool version, the
command line, and the seed. The top-level ``--seed`` is the only source
of randomness: per-stage generators are derived from it, so a command
reproduces byte-identically regardless of ``IMLIKE_THREADS``.

Settings can come from a flat ``key = value`` config file (``--config``)
whose keys are the long flag names; explicit flags win over the file.
Exit codes: 0 success, 2 usage error, 3 numeric non-convergence,
4 dataset error.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
import time

import numpy as np

from . import __version__
from .contours import alpha_cut_1d
from .engine import (
    bf_profile_contour,
    gamma_scale_contour,
    gaussian_loc_contour,
    vonmises_cond_contour,
)
from .errors import (
    ConvergenceError,
    DatasetError,
    DegenerateDataError,
    DomainError,
    InvalidParameterError,
)
from .inner import (
    InnerSampleSet,
    SAConfig,
    SigmaTable,
    fit_sigma_table,
    sample_inner_1d,
    sample_inner_md,
    weight_curve,
)
from .marginal import extension_contour, noncredibility_curve, ocd_study, pushforward
from .models import (
    BFData,
    GammaScale,
    GammaShapeScale,
    GaussianLocation,
    LEHMANN_TRAVEL,
    load_angles_csv,
    load_values_csv,
    polar_stats,
)
from .util import derive_rng, write_csv

__all__ = ["main"]

_MAPS = {
    "cos": np.cos,
    "cos1.5": lambda t: np.cos(1.5 * np.asarray(t, dtype=float)),
}


class UsageError(Exception):
    """A flag combination the parser alone cannot reject."""


def _require(cond, message):
    if not cond:
        raise UsageError(message)


# ---------------------------------------------------------------------
# small parsers for structured flag values
# ---------------------------------------------------------------------

def _parse_grid(text):
    """lo:hi:num -> linspace(lo, hi, num)."""
    parts = text.split(":")
    _require(len(parts) == 3, f"grid must be lo:hi:num, got {text!r}")
    try:
        lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must be lo:hi:num with numeric parts, got {text!r}")
    _require(hi > lo and num >= 3, f"grid needs hi > lo and num >= 3, got {text!r}")
    return np.linspace(lo, hi, num)


def _parse_floats(text, what):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}")


def _parse_ints(text, what):
    vals = _parse_floats(text, what)
    _require(all(float(v).is_integer() for v in vals),
             f"{what} must be integers, got {text!r}")
    return [int(v) for v in vals]


def _config_tokens(path):
    """Translate a flat ``key = value`` file into flag tokens.

    Keys are long option names (dashes or underscores); the value
    ``true`` emits a bare flag and ``false`` drops the entry, so
    boolean switches round-trip.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    tokens = []
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{ln}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip().replace("_", "-")
        value = value.strip()
        if not key:
            raise UsageError(f"{path}:{ln}: empty key")
        if value.lower() == "true":
            tokens.append(f"--{key}")
        elif value.lower() == "false":
            continue
        else:
            # the = form keeps values with a leading dash parseable
            tokens.append(f"--{key}={value}")
    return tokens


def _peek_config(argv):
    """Find the --config value before parsing.

    The config tokens must be merged ahead of the real parse, otherwise
    argparse rejects a command whose required flags live in the file.
    """
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a file path")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


# ---------------------------------------------------------------------
# shared argument blocks
# ---------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="top-level seed (default 0)")
    p.add_argument("--config", metavar="FILE",
                   help="flat key = value settings file; flags override it")


def _add_model_flags(p, multi=False, required=True, x_type=float):
    models = ["gaussian-loc", "gamma-scale", "vonmises", "bf-profile"]
    if multi:
        models.append("gamma-shape-scale")
    p.add_argument("--model", required=required, metavar="NAME",
                   help=f"one of: {', '.join(models)}")
    p.add_argument("--x", type=x_type,
                   help="observed statistic (comma-separated when a vector)")
    p.add_argument("--n", type=int, help="sample size / gamma shape count")
    p.add_argument("--var", type=float, default=1.0,
                   help="known variance for gaussian-loc (default 1)")
    p.add_argument("--kappa", type=float, help="von Mises concentration")
    p.add_argument("--data", metavar="FILE",
                   help="CSV dataset (angle column for vonmises, value column "
                        "for gamma-shape-scale)")
    p.add_argument("--g", type=float, help="mean direction (instead of --data)")
    p.add_argument("--u", type=float, help="mean resultant length (instead of --data)")
    p.add_argument("--dataset", metavar="NAME",
                   help="built-in dataset for bf-profile (lehmann-travel)")
    p.add_argument("--bf", metavar="N1,MEAN1,SD1,N2,MEAN2,SD2",
                   help="explicit two-sample summary for bf-profile")
    p.add_argument("--M", type=int, default=None,
                   help="Monte Carlo size for simulated contours")


def _bf_data(args):
    if args.bf:
        vals = _parse_floats(args.bf, "--bf")
        _require(len(vals) == 6, "--bf needs n1,mean1,sd1,n2,mean2,sd2")
        return BFData(n1=int(vals[0]), mean1=vals[1], sd1=vals[2],
                      n2=int(vals[3]), mean2=vals[4], sd2=vals[5])
    _require(args.dataset is not None,
             "--model bf-profile needs --dataset or --bf")
    if args.dataset == "lehmann-travel":
        return LEHMANN_TRAVEL
    raise UsageError(f"unknown dataset: {args.dataset!r}")


def _vonmises_stats(args):
    _require(args.kappa is not None, "--model vonmises needs --kappa")
    if args.data is not None:
        g, u = polar_stats(load_angles_csv(args.data, args.kappa))
    else:
        _require(args.g is not None and args.u is not None,
                 "--model vonmises needs --data or both --g and --u")
        g, u = args.g, args.u
    return g, u


def _build_1d_contour(args):
    """The contour named by --model, from its flags. 1-D models only."""
    model = args.model
    if model == "gaussian-loc":
        _require(args.x is not None, "--model gaussian-loc needs --x")
        return gaussian_loc_contour(args.x, var=args.var)
    if model == "gamma-scale":
        _require(args.x is not None, "--model gamma-scale needs --x")
        _require(args.n is not None, "--model gamma-scale needs --n")
        return gamma_scale_contour(args.x, args.n, M=args.M or 2000,
                                   seed=args.seed)
    if model == "vonmises":
        g, u = _vonmises_stats(args)
        return vonmises_cond_contour(g, u, args.kappa)
    if model == "bf-profile":
        return bf_profile_contour(_bf_data(args), M=args.M or 5000,
                                  seed=args.seed)
    raise UsageError(f"unknown model: {model!r}")


# ---------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------

def _comment(args):
    return f"imlike {__version__} | command: {args.command_line} | seed: {args.seed}"


def _emit_rows(contour, user_grid):
    """(thetas, values) to write: the cache, or a requested grid with the
    exact mode row spliced in so the argmax row is the MLE itself."""
    if user_grid is None:
        return contour.grid_cache
    thetas = np.asarray(user_grid, dtype=float)
    mode = float(np.atleast_1d(contour.mode)[0])
    if thetas[0] < mode < thetas[-1] and mode not in thetas:
        thetas = np.insert(thetas, int(np.searchsorted(thetas, mode)), mode)
    return thetas, np.asarray(contour.evaluate(thetas), dtype=float)


def _print_cut(contour, alpha):
    cut = alpha_cut_1d(contour, alpha)
    lo = "(" if cut.unbounded_low else "["
    hi = ")" if cut.unbounded_high else "]"
    pct = round(100 * (1 - alpha))
    print(f"{pct}% cut: {lo}{cut.shape.a:.6g}, {cut.shape.b:.6g}{hi}")
    return cut


def _write_manifest(out_dir, args, extras, t0):
    path = os.path.join(out_dir, "manifest.txt")
    lines = [f"tool = imlike {__version__}",
             f"command = {args.command_line}",
             f"seed = {args.seed}"]
    lines += [f"{k} = {v}" for k, v in extras.items()]
    lines.append(f"wall_time_s = {time.perf_counter() - t0:.3f}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")


def _write_curve(path, alphas, values, args):
    write_csv(path, ["alpha", "value"], np.column_stack([alphas, values]),
              comment=_comment(args))
    print(f"wrote {path}")


# ---------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------

def cmd_contour(args):
    contour = _build_1d_contour(args)
    grid = _parse_grid(args.grid) if args.grid else None
    thetas, values = _emit_rows(contour, grid)
    write_csv(args.out, ["theta_1", "plausibility"],
              np.column_stack([thetas, values]), comment=_comment(args))
    print(f"mle: {float(np.atleast_1d(contour.mode)[0]):.6g}")
    _print_cut(contour, 0.10)
    _print_cut(contour, 0.05)
    print(f"wrote {args.out}")
    return 0


def _gamma_weight_fn(contour, n_shape, x):
    """Interpolator for the exact-match weight curve of the gamma-scale
    pair (right-Haar inverse-gamma target)."""
    from scipy import stats

    posterior = stats.invgamma(n_shape, scale=x)
    grid = np.linspace(0.01, 0.99, 99)
    vals = weight_curve(posterior.pdf, contour, grid)
    ok = np.isfinite(vals)
    _require(int(ok.sum()) >= 2, "weight curve is undefined on this contour")
    return lambda a: np.interp(a, grid[ok], vals[ok])


def cmd_sample(args):
    if args.model == "gamma-shape-scale":
        return _sample_md(args)

    contour = _build_1d_contour(args)
    if args.w == "half":
        w = 0.5
    elif args.w == "curve":
        _require(args.model == "gamma-scale",
                 "--w curve is only defined for --model gamma-scale")
        w = _gamma_weight_fn(contour, args.n, args.x)
    else:
        raise UsageError(f"--w must be half or curve, got {args.w!r}")

    samples = sample_inner_1d(contour, args.n_draws, w=w,
                              rng=derive_rng(args.seed, 2))
    samples.to_csv(args.out, comment=_comment(args))
    flat = samples.thetas[:, 0]
    print(f"draws: {args.n_draws}  mean: {np.mean(flat):.6g}  "
          f"sd: {np.std(flat):.6g}  pseudo: {int(np.sum(samples.pseudo))}")
    print(f"wrote {args.out}")
    return 0


def _sample_md(args):
    _require(args.data is not None, "--model gamma-shape-scale needs --data")
    x = load_values_csv(args.data)
    model = GammaShapeScale(n=x.size)
    config = SAConfig(mc_size=args.mc_size)

    table = None
    if args.sigma_cache and os.path.exists(args.sigma_cache):
        table = SigmaTable.from_csv(args.sigma_cache)
        print(f"loaded sigma table from {args.sigma_cache}")
    if table is None:
        table = fit_sigma_table(model, x, config=config,
                                rng=derive_rng(args.seed, 1))
        if args.sigma_cache:
            table.to_csv(args.sigma_cache, comment=_comment(args))
            print(f"wrote {args.sigma_cache}")

    samples = sample_inner_md(model, x, args.n_draws, sigma_table=table,
                              allow_nonconverged=args.allow_nonconverged,
                              rng=derive_rng(args.seed, 2))
    samples.to_csv(args.out, comment=_comment(args))
    print(f"draws: {args.n_draws}  converged levels: "
          f"{int(np.sum(table.converged))}/{table.alpha_grid.size}")
    print(f"wrote {args.out}")
    return 0


def cmd_interval(args):
    contour = _build_1d_contour(args)
    alphas = _parse_floats(args.alpha, "--alpha")
    _require(len(alphas) > 0, "--alpha needs at least one level")
    rows = []
    for a in alphas:
        cut = _print_cut(contour, a)
        rows.append([a, cut.shape.a, cut.shape.b])
    if args.out:
        write_csv(args.out, ["alpha", "lower", "upper"], rows,
                  comment=_comment(args))
        print(f"wrote {args.out}")
    return 0


def cmd_marginal(args):
    _require(args.model == "vonmises",
             "marginal contours are built for --model vonmises")
    _require(args.map in _MAPS, f"--map must be one of {sorted(_MAPS)}")
    g, u = _vonmises_stats(args)
    joint = vonmises_cond_contour(g, u, args.kappa)
    phi_grid = _parse_grid(args.phi_grid)
    marg = extension_contour(joint, _MAPS[args.map], phi_grid)
    thetas, values = marg.grid_cache
    write_csv(args.out, ["phi", "plausibility"],
              np.column_stack([thetas, values]), comment=_comment(args))
    print(f"marginal mode: {float(np.atleast_1d(marg.mode)[0]):.6g}")
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------
# report subcommands
# ---------------------------------------------------------------------

def _report_validity(args, out_dir, t0):
    from . import figures
    from .diagnostics import validity_sim

    if args.model == "gaussian-loc":
        model, theta = GaussianLocation(var=args.var), args.theta
    elif args.model == "gamma-scale":
        _require(args.n is not None, "validity for gamma-scale needs --n")
        model, theta = GammaScale(args.n), args.theta
    else:
        raise UsageError(f"validity supports gaussian-loc or gamma-scale, "
                         f"got {args.model!r}")

    res = validity_sim(model, theta, reps=args.reps, M=args.M or 2000,
                       seed=args.seed)
    alphas = np.round(np.linspace(0.01, 0.99, 99), 2)
    _write_curve(os.path.join(out_dir, "validity.csv"),
                 alphas, res.ecdf(alphas), args)
    figures.save_ecdf_figure(os.path.join(out_dir, "validity.png"),
                             res.values, ks=res.ks,
                             title=f"validity: {args.model}")
    print(f"ks distance from uniform: {res.ks:.4f}")
    _write_manifest(out_dir, args, {"model": args.model, "theta": theta,
                                    "reps": args.reps, "M": args.M or 2000,
                                    "ks": f"{res.ks:.6f}"}, t0)
    return 0


def _report_coverage_bf(args, out_dir, t0):
    from . import figures
    from .diagnostics import TABLE1_SETTINGS, bf_coverage_table

    settings = dict(TABLE1_SETTINGS)
    for key in settings:
        val = getattr(args, key)
        if val is not None:
            settings[key] = val

    table = bf_coverage_table(settings=settings, reps=args.reps,
                              alpha=args.alpha, seed=args.seed,
                              M=args.M or 2000, n_post=args.n_post)
    path = os.path.join(out_dir, "coverage_bf.csv")
    table.to_csv(path, comment=_comment(args))
    print(f"wrote {path}")
    for row in table.rows:
        print(f"{row.method:>10}: coverage {row.coverage:.4f} "
              f"(se {row.coverage_se:.4f})  mean length {row.mean_length:.4f}")
    figures.save_coverage_figure(
        os.path.join(out_dir, "coverage_bf.png"),
        [r.method for r in table.rows],
        [r.coverage for r in table.rows],
        [r.coverage_se for r in table.rows],
        target=1.0 - args.alpha,
        title=f"coverage at alpha = {args.alpha}")
    _write_manifest(out_dir, args,
                    {"reps": args.reps, "M": args.M or 2000,
                     "n_post": args.n_post, "alpha": args.alpha,
                     "failures": table.failures, **settings}, t0)
    return 0


def _report_bvm(args, out_dir, t0):
    from . import figures
    from .diagnostics import bvm_check
    from .models import observed_info

    ns = _parse_ints(args.n_list, "--n-list")
    _require(len(ns) >= 1, "--n-list needs at least one n")
    config = SAConfig(mc_size=args.mc_size)
    discs = []
    for n in ns:
        model = GammaShapeScale(n=n)
        data = model.sample((args.shape, args.scale), 1,
                            derive_rng(args.seed, 200, n))[0]
        rng = derive_rng(args.seed, 201, n)
        table = fit_sigma_table(model, data, config=config, rng=rng)
        samples = sample_inner_md(model, data, args.n_draws, sigma_table=table,
                                  rng=rng, allow_nonconverged=True)
        theta_hat = model.mle(data)
        disc = bvm_check(samples.thetas, theta_hat,
                         observed_info(model, data, theta_hat))
        discs.append(disc)
        print(f"n = {n:>5}: gaussian-approximation discrepancy {disc:.4f}  "
              f"(converged levels {int(np.sum(table.converged))}/"
              f"{table.alpha_grid.size})")
    write_csv(os.path.join(out_dir, "bvm.csv"), ["n", "discrepancy"],
              np.column_stack([ns, discs]), comment=_comment(args))
    print(f"wrote {os.path.join(out_dir, 'bvm.csv')}")
    figures.save_trend_figure(os.path.join(out_dir, "bvm.png"), ns, discs,
                              title="posterior vs Gaussian across n")
    _write_manifest(out_dir, args,
                    {"n_list": ",".join(str(n) for n in ns),
                     "shape": args.shape, "scale": args.scale,
                     "n_draws": args.n_draws, "mc_size": args.mc_size}, t0)
    return 0


def _report_noncred_gamma(args, out_dir, t0):
    from scipy import stats

    from . import figures

    _require(args.x is not None and args.n is not None,
             "noncred for gamma-scale needs --x and --n")
    xs = _parse_floats(args.x, "--x")
    _require(len(xs) == 1, "noncred for gamma-scale needs a scalar --x")
    x = xs[0]
    M = args.M or 20000
    contour = gamma_scale_contour(x, args.n, M=M, seed=args.seed)
    N = args.n_draws

    half = sample_inner_1d(contour, N, w=0.5, rng=derive_rng(args.seed, 1))
    curve = sample_inner_1d(contour, N, w=_gamma_weight_fn(contour, args.n, x),
                            rng=derive_rng(args.seed, 2))
    post = stats.invgamma.rvs(args.n, scale=x, size=N,
                              random_state=derive_rng(args.seed, 3))
    post_set = InnerSampleSet(levels=np.asarray(contour.evaluate(post)),
                              thetas=post, pseudo=np.zeros(N, dtype=bool))

    curves = []
    extras = {"M": M, "n_draws": N}
    for name, samples in [("half", half), ("curve", curve),
                          ("posterior", post_set)]:
        alphas, vals = noncredibility_curve(samples, contour)
        _write_curve(os.path.join(out_dir, f"noncred_{name}.csv"),
                     alphas, vals, args)
        dev = float(np.max(np.abs(vals - alphas)))
        extras[f"max_dev_{name}"] = f"{dev:.4f}"
        print(f"{name:>10}: max deviation from diagonal {dev:.4f}")
        curves.append((name, alphas, vals))
    figures.save_curves_figure(os.path.join(out_dir, "noncred.png"), curves,
                               ylabel="non-credibility",
                               title=f"gamma-scale n={args.n}, x={x:g}")
    _write_manifest(out_dir, args, extras, t0)
    return 0


def _report_noncred_vonmises(args, out_dir, t0):
    from . import figures

    _require(args.map in _MAPS, f"--map must be one of {sorted(_MAPS)}")
    m = _MAPS[args.map]
    g, u = _vonmises_stats(args)
    joint = vonmises_cond_contour(g, u, args.kappa)
    marg = extension_contour(joint, m, _parse_grid(args.phi_grid))
    N = args.n_draws

    push = pushforward(sample_inner_1d(joint, N, w=0.5,
                                       rng=derive_rng(args.seed, 1)), m)
    bayes_phi = m(derive_rng(args.seed, 2).vonmises(g, args.kappa * u, N))
    bayes = InnerSampleSet(levels=np.asarray(marg.evaluate(bayes_phi)),
                           thetas=bayes_phi, pseudo=np.zeros(N, dtype=bool))
    pseudo = sample_inner_1d(marg, N, w=0.5, rng=derive_rng(args.seed, 3))

    curves = []
    extras = {"map": args.map, "g": f"{g:.6f}", "u": f"{u:.6f}",
              "kappa": args.kappa, "n_draws": N,
              "pseudo_draws": int(np.sum(pseudo.pseudo))}
    for name, samples in [("pushforward", push), ("bayes", bayes),
                          ("pseudo", pseudo)]:
        alphas, vals = noncredibility_curve(samples, marg)
        _write_curve(os.path.join(out_dir, f"noncred_{name}.csv"),
                     alphas, vals, args)
        dev = float(np.max(np.abs(vals - alphas)))
        extras[f"max_dev_{name}"] = f"{dev:.4f}"
        print(f"{name:>11}: max deviation from diagonal {dev:.4f}")
        curves.append((name, alphas, vals))
    figures.save_curves_figure(os.path.join(out_dir, "noncred.png"), curves,
                               ylabel="non-credibility",
                               title=f"von Mises marginal: {args.map}")
    _write_manifest(out_dir, args, extras, t0)
    return 0


def _report_noncred(args, out_dir, t0):
    if args.model == "gamma-scale":
        return _report_noncred_gamma(args, out_dir, t0)
    if args.model == "vonmises":
        return _report_noncred_vonmises(args, out_dir, t0)
    raise UsageError(f"noncred supports gamma-scale or vonmises, "
                     f"got {args.model!r}")


def _report_ocd(args, out_dir, t0):
    from . import figures

    _require(args.x is not None, "ocd needs --x")
    x = _parse_floats(args.x, "--x")
    x = x[0] if len(x) == 1 else x
    alphas, vals = ocd_study(args.case, x, N=args.n_draws, seed=args.seed)
    _write_curve(os.path.join(out_dir, "ocd.csv"), alphas, vals, args)
    over = float(np.max(vals - (1.0 - alphas)))
    print(f"max mass above the 1-alpha line: {over:+.4f}")
    figures.save_curves_figure(
        os.path.join(out_dir, "ocd.png"),
        [(args.case, alphas, vals)], ylabel="posterior mass of image cut",
        diagonal="down", title=f"over-confidence: {args.case}")
    _write_manifest(out_dir, args,
                    {"case": args.case, "x": args.x, "n_draws": args.n_draws,
                     "max_over": f"{over:+.4f}"}, t0)
    return 0


_SUBREPORTS = {
    "validity": _report_validity,
    "coverage-bf": _report_coverage_bf,
    "bvm": _report_bvm,
    "noncred": _report_noncred,
    "ocd": _report_ocd,
}


def cmd_report(args):
    t0 = time.perf_counter()
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    return _SUBREPORTS[args.subreport](args, out_dir, t0)


# ---------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="imlike",
        description="Possibilistic inference from parametric likelihoods: "
                    "calibrated contours, inner-approximation sampling, and "
                    "the accompanying simulation reports.")
    parser.add_argument("--version", action="version",
                        version=f"imlike {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("contour", help="write a plausibility contour CSV")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--grid", metavar="LO:HI:NUM",
                   help="output grid (default: the builder's own grid)")
    p.add_argument("--out", default="contour.csv", help="output CSV path")

    p = sub.add_parser("sample", help="draw from the inner approximation")
    _add_common(p)
    _add_model_flags(p, multi=True)
    p.add_argument("--n-draws", type=int, default=10000,
                   help="number of draws (default 10000)")
    p.add_argument("--w", default="half",
                   help="lower-endpoint weight: half or curve (default half)")
    p.add_argument("--mc-size", type=int, default=2000,
                   help="contour MC size inside sigma fitting (default 2000)")
    p.add_argument("--sigma-cache", metavar="FILE",
                   help="sigma table CSV to reuse, or to write after fitting")
    p.add_argument("--allow-nonconverged", action="store_true",
                   help="sample even if some sigma levels did not converge")
    p.add_argument("--out", default="samples.csv", help="output CSV path")

    p = sub.add_parser("interval", help="print alpha-cuts at given levels")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--alpha", default="0.1,0.05",
                   help="comma-separated levels (default 0.1,0.05)")
    p.add_argument("--out", default=None, help="optional CSV path")

    p = sub.add_parser("marginal",
                       help="extension-principle contour of a derived parameter")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--map", required=True,
                   help=f"derived-parameter map: one of {sorted(_MAPS)}")
    p.add_argument("--phi-grid", default="-1:1:513", metavar="LO:HI:NUM",
                   help="marginal grid (default -1:1:513)")
    p.add_argument("--out", default="marginal.csv", help="output CSV path")

    p = sub.add_parser("report", help="run a simulation study")
    p.add_argument("subreport", choices=sorted(_SUBREPORTS),
                   help="which study to run")
    _add_common(p)
    _add_model_flags(p, required=False, x_type=str)
    p.add_argument("--out-dir", default=".",
                   help="directory for CSVs, figures, and the manifest")
    p.add_argument("--theta", type=float, default=None,
                   help="true parameter for the validity study")
    p.add_argument("--reps", type=int, default=2000,
                   help="replications (validity, coverage-bf)")
    p.add_argument("--alpha", type=float, default=0.1,
                   help="interval level for coverage-bf (default 0.1)")
    p.add_argument("--n-post", type=int, default=2000,
                   help="posterior draws per replication in coverage-bf")
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    p.add_argument("--mean1", type=float, default=None)
    p.add_argument("--var1", type=float, default=None)
    p.add_argument("--mean2", type=float, default=None)
    p.add_argument("--var2", type=float, default=None)
    p.add_argument("--n-list", default="20,80,320",
                   help="sample sizes for the bvm study (default 20,80,320)")
    p.add_argument("--shape", type=float, default=7.0,
                   help="true gamma shape for the bvm study (default 7)")
    p.add_argument("--scale", type=float, default=3.0,
                   help="true gamma scale for the bvm study (default 3)")
    p.add_argument("--n-draws", type=int, default=None,
                   help="posterior/inner draws (study-specific default)")
    p.add_argument("--mc-size", type=int, default=2000,
                   help="contour MC size inside sigma fitting (default 2000)")
    p.add_argument("--map", default="cos",
                   help=f"map for vonmises noncred: one of {sorted(_MAPS)}")
    p.add_argument("--phi-grid", default="-1:1:513", metavar="LO:HI:NUM")
    p.add_argument("--case", default="bounded",
                   help="ocd study case: bounded, sqnorm, or linear")

    return parser


_DEFAULT_DRAWS = {"validity": None, "coverage-bf": None, "bvm": 10000,
                  "noncred": 10000, "ocd": 200000}


def _fill_report_defaults(args):
    if args.command != "report":
        return
    if args.n_draws is None:
        args.n_draws = _DEFAULT_DRAWS.get(args.subreport)
    if args.subreport == "validity":
        if args.model is None:
            args.model = "gaussian-loc"
        if args.theta is None:
            args.theta = 0.0 if args.model == "gaussian-loc" else 1.0


def _run(argv):
    parser = _build_parser()
    config = _peek_config(argv)
    merged = argv if config is None else (
        argv[:1] + _config_tokens(config) + argv[1:])
    args = parser.parse_args(merged)
    args.command_line = shlex.join(["imlike"] + list(argv))
    _fill_report_defaults(args)
    dispatch = {"contour": cmd_contour, "sample": cmd_sample,
                "interval": cmd_interval, "marginal": cmd_marginal,
                "report": cmd_report}
    return dispatch[args.command](args)


def main(argv=None):
    argv = list(sys.argv[1:]) if argv is None else [str(a) for a in argv]
    try:
        return _run(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    except (UsageError, InvalidParameterError, DomainError) as exc:
        print(f"imlike: error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"imlike: did not converge: {exc}", file=sys.stderr)
        return 3
    except (DatasetError, DegenerateDataError, OSError) as exc:
        print(f"imlike: dataset error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
