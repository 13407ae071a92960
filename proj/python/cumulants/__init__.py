"""Unbiased estimators of joint cumulants.

Estimators are derived exactly (rational coefficients in the sample count m),
evaluated on columns of samples, and checked by simulation.
"""

from ._core import (
    DataError,
    Spec,
    UnsupportedEstimatorError,
    derive,
    estimate,
    estimator,
    exact_cumulant,
    plug_in_variance,
    registry,
    sample,
    select,
    simulate,
    smith_cumulants,
)

__all__ = [
    "DataError",
    "Spec",
    "UnsupportedEstimatorError",
    "derive",
    "estimate",
    "estimator",
    "exact_cumulant",
    "plug_in_variance",
    "registry",
    "sample",
    "select",
    "simulate",
    "smith_cumulants",
]
