"""Possibilistic inference from parametric likelihoods.

The package builds plausibility contours whose alpha-cuts are exact
confidence sets, samples the inner probabilistic approximation those
contours dominate (a confidence distribution without a prior), pushes
contours through derived-parameter maps, and ships the simulation
studies that check all of it: validity, two-sample coverage, the
Gaussian large-n limit, non-credibility, and over-confidence curves.

The command-line entry point lives in ``imlike.cli``; figure rendering
in ``imlike.figures``. Neither is imported here, so library use never
pulls in matplotlib.
"""

from .contours import (
    AlphaCut,
    Ellipsoid,
    GaussianPossibilityParams,
    Interval,
    PossibilityContour,
    alpha_cut_1d,
    gaussian_contour,
    possibility_of_set,
    prob_to_poss_empirical,
)
from .diagnostics import (
    CoverageRow,
    CoverageTable,
    TABLE1_SETTINGS,
    ValidityResult,
    bayes_bf_sample,
    bf_coverage_table,
    bvm_check,
    u_statistic,
    u_statistic_quadratic,
    validity_sim,
    welch_interval,
    welch_nu,
)
from .engine import (
    MCValue,
    bf_profile_contour,
    contour_bf_profile,
    contour_bf_profile_grid,
    contour_grid,
    contour_mc,
    contour_pivot_gamma,
    contour_vonmises_cond,
    gamma_scale_contour,
    gaussian_loc_contour,
    vonmises_cond_contour,
)
from .errors import (
    ConvergenceError,
    DatasetError,
    DegenerateDataError,
    DomainError,
    IMError,
    InvalidParameterError,
)
from .inner import (
    DEFAULT_ALPHA_GRID,
    InnerSampleSet,
    SAConfig,
    SigmaFit,
    SigmaTable,
    embellish_info,
    fit_sigma,
    fit_sigma_table,
    sample_boundary,
    sample_inner_1d,
    sample_inner_md,
    weight_curve,
)
from .marginal import (
    bounded_map,
    extension_contour,
    noncredibility_curve,
    ocd_curve,
    ocd_study,
    pushforward,
)
from .models import (
    AnglesData,
    BFData,
    Correlation,
    GammaScale,
    GammaShapeScale,
    GaussianLocation,
    LEHMANN_TRAVEL,
    Model,
    VonMisesMean,
    bf_profile_fit,
    bf_profile_rloglik,
    fit_mle,
    load_angles_csv,
    load_pairs_csv,
    load_values_csv,
    observed_info,
    polar_stats,
    relative_likelihood,
)
from .util import derive_rng, ks_distance_uniform, read_csv, thread_count, write_csv

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # contours
    "PossibilityContour", "AlphaCut", "Interval", "Ellipsoid",
    "GaussianPossibilityParams", "gaussian_contour", "alpha_cut_1d",
    "possibility_of_set", "prob_to_poss_empirical",
    # models
    "Model", "GaussianLocation", "GammaScale", "VonMisesMean", "Correlation",
    "GammaShapeScale", "BFData", "AnglesData", "LEHMANN_TRAVEL",
    "relative_likelihood", "polar_stats", "bf_profile_rloglik",
    "bf_profile_fit", "fit_mle", "observed_info",
    "load_angles_csv", "load_pairs_csv", "load_values_csv",
    # engine
    "MCValue", "contour_mc", "contour_pivot_gamma", "contour_vonmises_cond",
    "contour_bf_profile", "contour_bf_profile_grid", "contour_grid",
    "gaussian_loc_contour", "gamma_scale_contour", "vonmises_cond_contour",
    "bf_profile_contour",
    # inner approximation
    "SAConfig", "SigmaFit", "SigmaTable", "InnerSampleSet",
    "DEFAULT_ALPHA_GRID", "sample_inner_1d", "weight_curve", "embellish_info",
    "fit_sigma", "fit_sigma_table", "sample_boundary", "sample_inner_md",
    # marginalization
    "extension_contour", "pushforward", "noncredibility_curve",
    "ocd_curve", "ocd_study", "bounded_map",
    # diagnostics
    "ValidityResult", "validity_sim", "welch_nu", "welch_interval",
    "bayes_bf_sample", "TABLE1_SETTINGS", "CoverageRow", "CoverageTable",
    "bf_coverage_table", "bvm_check", "u_statistic", "u_statistic_quadratic",
    # errors
    "IMError", "InvalidParameterError", "DomainError", "DegenerateDataError",
    "ConvergenceError", "DatasetError",
    # utilities
    "derive_rng", "thread_count", "ks_distance_uniform",
    "write_csv", "read_csv",
]
