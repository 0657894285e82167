"""Mixture vector autoregressions with structural shock identification.

The package covers the full workflow: model representation and simulation,
maximum likelihood estimation through a genetic search plus gradient
refinement, identification of structural shocks by simultaneous
diagonalization of the regime error covariances, Monte Carlo generalized
impulse responses, and quantile residual diagnostics.
"""

from .data_io import (
    HP_LAMBDA_DEFAULT,
    SeriesFrame,
    apply_transforms,
    hp_filter_one_sided,
    hp_filter_two_sided,
    load_csv,
    log_diff_100,
    save_csv,
)
from .diagnostics import CorrelogramSet, ShapeSummary, correlogram, shape_summary
from .errors import DataError, EstimationError, IdentificationError, MixvarError, ModelError
from .estimation import (
    Constraints,
    EstimationConfig,
    EstimationResult,
    GAConfig,
    InformationCriteria,
    ParameterSpace,
    RefineConfig,
    StandardErrors,
    TestResult,
    config_from_dict,
    fit,
    genetic_search,
    information_criteria,
    load_config,
    lr_test,
    parameter_count,
    refine,
    standard_errors,
    wald_test,
)
from .girf import GirfResult, GirfSpec, estimate_girf, girf_rows, scale_girf
from .likelihood import (
    LogLikelihood,
    QuantileResidualMatrix,
    conditional_loglik,
    exact_loglik,
    quantile_residuals,
)
from .model import (
    Dimensions,
    MixingWeights,
    ModelParameters,
    Regime,
    RegimeSummary,
    SimulatedPath,
    StationaryMoments,
    companion_matrix,
    conditional_moments,
    mixing_weights,
    regime_summary,
    simulate,
    stationary_moments,
    validate_stability,
)
from .model_io import load_model, model_from_dict, model_to_dict, save_model
from .structural import (
    FREE,
    NEGATIVE,
    POSITIVE,
    ZERO,
    ConstraintPattern,
    DistinctnessReport,
    IdentificationResult,
    ImpactMatrix,
    StructuralParams,
    Verdict,
    build_B,
    check_assumption1,
    check_identification,
    decompose_two_regime,
    normalize_W,
)

__version__ = "0.1.0"

__all__ = [
    "HP_LAMBDA_DEFAULT",
    "SeriesFrame",
    "apply_transforms",
    "hp_filter_one_sided",
    "hp_filter_two_sided",
    "load_csv",
    "log_diff_100",
    "save_csv",
    "CorrelogramSet",
    "ShapeSummary",
    "correlogram",
    "shape_summary",
    "DataError",
    "EstimationError",
    "IdentificationError",
    "MixvarError",
    "ModelError",
    "Constraints",
    "EstimationConfig",
    "EstimationResult",
    "GAConfig",
    "InformationCriteria",
    "ParameterSpace",
    "RefineConfig",
    "StandardErrors",
    "TestResult",
    "config_from_dict",
    "fit",
    "genetic_search",
    "information_criteria",
    "load_config",
    "lr_test",
    "parameter_count",
    "refine",
    "standard_errors",
    "wald_test",
    "GirfResult",
    "GirfSpec",
    "estimate_girf",
    "girf_rows",
    "scale_girf",
    "LogLikelihood",
    "QuantileResidualMatrix",
    "conditional_loglik",
    "exact_loglik",
    "quantile_residuals",
    "Dimensions",
    "MixingWeights",
    "ModelParameters",
    "Regime",
    "RegimeSummary",
    "SimulatedPath",
    "StationaryMoments",
    "companion_matrix",
    "conditional_moments",
    "mixing_weights",
    "regime_summary",
    "simulate",
    "stationary_moments",
    "validate_stability",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "save_model",
    "FREE",
    "NEGATIVE",
    "POSITIVE",
    "ZERO",
    "ConstraintPattern",
    "DistinctnessReport",
    "IdentificationResult",
    "ImpactMatrix",
    "StructuralParams",
    "Verdict",
    "build_B",
    "check_assumption1",
    "check_identification",
    "decompose_two_regime",
    "normalize_W",
    "__version__",
]
