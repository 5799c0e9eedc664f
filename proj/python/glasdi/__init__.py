"""Greedy latent-space dynamics identification for parameterized 2D Burgers."""

from ._core import (
    Divergence,
    DimensionMismatch,
    FomConfig,
    FormatError,
    GlasdiError,
    InvalidConfig,
    NonConvergence,
    ParamSpace,
    RomModel,
    RunConfig,
    Trajectory,
    error_indicator,
    fit_error_model,
    fom_step_count,
    initial_state,
    load_checkpoint,
    load_config,
    max_relative_error,
    pearson_correlation,
    predict,
    predict_latent,
    read_trajectory,
    residual,
    rhs,
    run_cli,
    shepard_weights,
    simulate,
    step,
    write_trajectory,
)

__all__ = [
    "Divergence",
    "DimensionMismatch",
    "FomConfig",
    "FormatError",
    "GlasdiError",
    "InvalidConfig",
    "NonConvergence",
    "ParamSpace",
    "RomModel",
    "RunConfig",
    "Trajectory",
    "error_indicator",
    "fit_error_model",
    "fom_step_count",
    "initial_state",
    "load_checkpoint",
    "load_config",
    "max_relative_error",
    "pearson_correlation",
    "predict",
    "predict_latent",
    "read_trajectory",
    "residual",
    "rhs",
    "run_cli",
    "shepard_weights",
    "simulate",
    "step",
    "write_trajectory",
]
