"""Conservative tail-fraction estimation for multiple testing.

Estimate the fraction of latent effect sizes strictly above a threshold,
guaranteed (with simultaneous probability at least 1 - alpha) not to
overestimate it, by fitting mixing distributions inside a finite-sample
empirical-CDF band.  Ships the estimator, baselines (per-hypothesis
rejection counting, grid maximum likelihood), pilot-design calculators,
simulation drivers, and a CLI.
"""

__version__ = "0.1.0"

from .baselines import NpmleConfig, fwer_count, npmle_fit, plugin_zeta
from .data import Dataset, fit_null_scale, load_tsv, write_tsv
from .ecdf import (
    ConstraintPoints,
    EmpiricalCdf,
    constraint_points,
    dkw_threshold,
    sup_distance,
)
from .errors import DataError, ModelMisfitError, NumericalError
from .estimator import (
    EstimateCurve,
    EstimatorConfig,
    MeanGrid,
    ZetaEstimate,
    estimate_curve,
    estimate_zeta,
    estimate_zeta_bisect,
    make_grid,
    test_statistic,
)
from .kernels import (
    Family,
    MixingDistribution,
    ObservationModel,
    kernel_cdf,
    mixture_cdf,
    mixture_tail,
)
from .pilot import (
    PilotPlan,
    detection_sample_complexity,
    detection_sample_complexity_small_gamma,
    estimation_sample_complexity,
    followup_replicates,
    min_detectable_effect,
    min_pilot_hypotheses,
    plan_pilot,
)
from .reporting import ExperimentReport
from .simulate import (
    TwoSpikeConfig,
    beta_mixture_tail,
    run_beta_mixture_experiment,
    run_conservativeness_trial,
    run_convergence_experiment,
    run_detection_heatmap,
    sample_beta_mixture,
    sample_two_spike,
)

__all__ = [
    "__version__",
    "ConstraintPoints",
    "DataError",
    "Dataset",
    "EmpiricalCdf",
    "EstimateCurve",
    "EstimatorConfig",
    "ExperimentReport",
    "Family",
    "MeanGrid",
    "MixingDistribution",
    "ModelMisfitError",
    "NpmleConfig",
    "NumericalError",
    "ObservationModel",
    "PilotPlan",
    "TwoSpikeConfig",
    "ZetaEstimate",
    "beta_mixture_tail",
    "constraint_points",
    "detection_sample_complexity",
    "detection_sample_complexity_small_gamma",
    "dkw_threshold",
    "estimate_curve",
    "estimate_zeta",
    "estimate_zeta_bisect",
    "estimation_sample_complexity",
    "fit_null_scale",
    "followup_replicates",
    "fwer_count",
    "kernel_cdf",
    "load_tsv",
    "make_grid",
    "min_detectable_effect",
    "min_pilot_hypotheses",
    "mixture_cdf",
    "mixture_tail",
    "npmle_fit",
    "plan_pilot",
    "plugin_zeta",
    "run_beta_mixture_experiment",
    "run_conservativeness_trial",
    "run_convergence_experiment",
    "run_detection_heatmap",
    "sample_beta_mixture",
    "sample_two_spike",
    "sup_distance",
    "test_statistic",
    "write_tsv",
]
