"""Orthogonal subsampling (OSS) for big-data linear regression.

Selects ``k`` of ``n`` rows whose ``[-1, 1]``-scaled covariates best
approximate a two-level orthogonal array, which makes least-squares fits on
the subsample close to D- and A-optimal. Uniform and IBOSS subsamplers,
least-squares evaluation and simulation drivers are included for
comparison.
"""

__version__ = "0.1.0"

from .baselines import iboss_select, uniform_select
from .dataio import (
    DataMatrix,
    ScalingTransform,
    SyntheticSpec,
    UnitScaler,
    expand_interactions,
    generate_covariates,
    generate_response,
    load_csv,
    make_dataset,
    scale_to_unit,
    write_csv,
)
from .discrepancy import (
    brute_force_min_discrepancy,
    discrepancy_lower_bound,
    is_orthogonal_array,
    pair_loss,
    sign_agreement,
    total_discrepancy,
)
from .estimators import (
    IBOSSSubsampler,
    OrthogonalSubsampler,
    SubsampleRegressor,
    UniformSubsampler,
)
from .evaluation import (
    BenchmarkSpec,
    EfficiencyReport,
    FitResult,
    RankDeficiencyError,
    a_efficiency,
    adjusted_intercept,
    d_efficiency,
    efficiency_report,
    empirical_mse,
    information_matrix,
    ols_fit,
    run_benchmark,
    run_bootstrap,
)
from .oss import SubsampleResult, oss_select, oss_select_batched

__all__ = [
    "BenchmarkSpec", "DataMatrix", "EfficiencyReport", "FitResult", "IBOSSSubsampler",
    "OrthogonalSubsampler", "RankDeficiencyError", "ScalingTransform", "SubsampleRegressor",
    "SubsampleResult", "SyntheticSpec", "UniformSubsampler", "UnitScaler",
    "a_efficiency", "adjusted_intercept", "brute_force_min_discrepancy", "d_efficiency",
    "discrepancy_lower_bound", "efficiency_report", "empirical_mse", "expand_interactions",
    "generate_covariates", "generate_response", "iboss_select", "information_matrix",
    "is_orthogonal_array", "load_csv", "make_dataset", "ols_fit", "oss_select",
    "oss_select_batched", "pair_loss", "run_benchmark", "run_bootstrap", "scale_to_unit",
    "sign_agreement", "total_discrepancy", "uniform_select", "write_csv",
]
