"""Adaptive weights clustering for data near low-dimensional manifolds.

The public surface: special functions for the ball-overlap coefficient, the
curvature/noise adjustment, the multiscale weight-update algorithm (both as
functions and as a scikit-learn style estimator), seeded synthetic data
generators, and evaluation metrics.
"""

from .coefficients import (
    AssumptionReport,
    GeometryParams,
    adjusted_coefficient,
    check_assumptions,
    eps_manifold,
    eps_noise,
    suggest_lambda,
)
from .core import (
    BandwidthSchedule,
    StepDiagnostics,
    WeightMatrix,
    awc_run,
    awc_step,
    build_schedule,
    empirical_union_mass,
    gap_estimate,
    init_weights,
    kl_bernoulli,
    neighbors_within,
    test_statistic,
)
from .datagen import (
    CounterRng,
    Dataset,
    GapDensitySpec,
    ManifoldSpec,
    add_bounded_noise,
    sample_circle_gap,
    sample_uniform_manifold,
)
from .estimator import AdaptiveWeightsClustering
from .evaluation import (
    GapCoefficientEstimate,
    PairClassification,
    kl_null_vs_gap,
    lens_ratio_closed_form,
    local_rand_index,
    mc_gap_coefficient,
    misclassification_rate,
    pair_classifications,
    propagation_trial,
    separation_trial,
)
from .special import (
    PrecisionConfig,
    beta,
    incomplete_beta,
    incomplete_beta_series,
    log_gamma,
    volume_coefficient,
    volume_coefficient_bounds,
    volume_coefficient_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveWeightsClustering",
    "AssumptionReport",
    "BandwidthSchedule",
    "CounterRng",
    "Dataset",
    "GapCoefficientEstimate",
    "GapDensitySpec",
    "PairClassification",
    "GeometryParams",
    "ManifoldSpec",
    "PrecisionConfig",
    "StepDiagnostics",
    "WeightMatrix",
    "add_bounded_noise",
    "adjusted_coefficient",
    "awc_run",
    "awc_step",
    "beta",
    "build_schedule",
    "check_assumptions",
    "empirical_union_mass",
    "eps_manifold",
    "eps_noise",
    "gap_estimate",
    "incomplete_beta",
    "incomplete_beta_series",
    "init_weights",
    "kl_bernoulli",
    "kl_null_vs_gap",
    "lens_ratio_closed_form",
    "local_rand_index",
    "log_gamma",
    "mc_gap_coefficient",
    "misclassification_rate",
    "pair_classifications",
    "neighbors_within",
    "propagation_trial",
    "sample_circle_gap",
    "sample_uniform_manifold",
    "separation_trial",
    "suggest_lambda",
    "test_statistic",
    "volume_coefficient",
    "volume_coefficient_bounds",
    "volume_coefficient_derivative",
]
