"""calerr: calibration-error measurement and post-hoc recalibration.

The public surface re-exported here covers the prediction containers, the
32-variant calibration-error family, the recalibrators, the optimizers they
train with, and the analysis harnesses.  See the README for a tour.
"""

from .predictions import (
    LogitSet,
    PredictionSet,
    ScoredPrediction,
    ScoredPredictions,
    ValidationError,
    full_prob_view,
    max_prob_view,
    row_softmax,
    softmax,
    split_validation,
)
from .binning import (
    DEFAULT_BINS,
    BinScheme,
    BinStats,
    adaptive_edges,
    bin_stats,
    even_edges,
)
from .metrics import (
    NAMED_METRICS,
    CalibrationScore,
    EmptyMeasurementError,
    MetricConfig,
    all_configs,
    binned_stats,
    brier_score,
    gce,
    index_to_config,
    metric_index,
    named_metric,
)
from .optimize import (
    DivergenceError,
    NelderMeadResult,
    SgdConfig,
    grad_check,
    nelder_mead,
    sgd_minimize,
)
from .recalibrate import (
    AffineScalingModel,
    HistogramBinningModel,
    IsotonicModel,
    MlpScalingModel,
    TemperatureModel,
    affine_objective,
    apply_affine,
    apply_histogram_binning,
    apply_isotonic,
    apply_isotonic_multiclass,
    apply_mlp_scaling,
    apply_temperature,
    fit_affine_scaling,
    fit_histogram_binning,
    fit_isotonic,
    fit_isotonic_multiclass,
    fit_mlp_scaling,
    fit_temperature,
    init_mlp_params,
    mlp_objective,
    model_from_dict,
    model_to_dict,
    nll,
)
from .analysis import (
    NoiseLevelResult,
    RankTable,
    SweepResult,
    average_ranks,
    bin_sensitivity_sweep,
    label_noise_experiment,
    make_pathology,
    rank_correlation,
    rank_methods,
    recalibrate_suite,
    reliability_data,
    sample_mixed_difficulty_logits,
    sample_overconfident_logits,
)
from .io import (
    PredictionFileError,
    RunConfig,
    read_prediction_file,
    read_run_config,
    write_prediction_file,
)

__version__ = "0.1.0"

__all__ = [
    "LogitSet",
    "PredictionSet",
    "ScoredPrediction",
    "ScoredPredictions",
    "ValidationError",
    "full_prob_view",
    "max_prob_view",
    "row_softmax",
    "softmax",
    "split_validation",
    "DEFAULT_BINS",
    "BinScheme",
    "BinStats",
    "adaptive_edges",
    "bin_stats",
    "even_edges",
    "NAMED_METRICS",
    "CalibrationScore",
    "EmptyMeasurementError",
    "MetricConfig",
    "all_configs",
    "binned_stats",
    "brier_score",
    "gce",
    "index_to_config",
    "metric_index",
    "named_metric",
    "DivergenceError",
    "NelderMeadResult",
    "SgdConfig",
    "grad_check",
    "nelder_mead",
    "sgd_minimize",
    "AffineScalingModel",
    "HistogramBinningModel",
    "IsotonicModel",
    "MlpScalingModel",
    "TemperatureModel",
    "affine_objective",
    "apply_affine",
    "apply_histogram_binning",
    "apply_isotonic",
    "apply_isotonic_multiclass",
    "apply_mlp_scaling",
    "apply_temperature",
    "fit_affine_scaling",
    "fit_histogram_binning",
    "fit_isotonic",
    "fit_isotonic_multiclass",
    "fit_mlp_scaling",
    "fit_temperature",
    "init_mlp_params",
    "mlp_objective",
    "model_from_dict",
    "model_to_dict",
    "nll",
    "NoiseLevelResult",
    "RankTable",
    "SweepResult",
    "average_ranks",
    "bin_sensitivity_sweep",
    "label_noise_experiment",
    "make_pathology",
    "rank_correlation",
    "rank_methods",
    "recalibrate_suite",
    "reliability_data",
    "sample_mixed_difficulty_logits",
    "sample_overconfident_logits",
    "PredictionFileError",
    "RunConfig",
    "read_prediction_file",
    "read_run_config",
    "write_prediction_file",
    "__version__",
]
