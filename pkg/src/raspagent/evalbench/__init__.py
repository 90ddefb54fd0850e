"""Evaluation: parameter-set scoring, batch rates and repeated-run benchmarks."""

from .params import (
    ParameterSet,
    ParameterSlot,
    ScoreReport,
    batch_rates,
    batch_rates_exact,
    bundle_parameter_set,
    canonical_key,
    score_parameters,
)

__all__ = [
    "ParameterSet",
    "ParameterSlot",
    "ScoreReport",
    "batch_rates",
    "batch_rates_exact",
    "bundle_parameter_set",
    "canonical_key",
    "score_parameters",
]
