"""Model-free prediction from multivariate time series."""

from ._core import (
    DataError,
    ValidationError,
    complexity,
    estimate_cmi,
    estimate_mi,
    gen_fixed_model,
    gen_gam_member,
    gen_synergetic_member,
    knn_forecast,
    select,
    shuffle_test,
    srmse,
)

__all__ = [
    "DataError",
    "ValidationError",
    "complexity",
    "estimate_cmi",
    "estimate_mi",
    "gen_fixed_model",
    "gen_gam_member",
    "gen_synergetic_member",
    "knn_forecast",
    "select",
    "shuffle_test",
    "srmse",
]
