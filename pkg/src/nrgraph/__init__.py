"""Simulation and bound checks for the critical Norros-Reittu random graph."""

from .dist import (
    AliasTable,
    ExplicitQuantile,
    ParetoTail,
    WeightSequence,
    build_weights,
    critical_cF,
    exact_moments,
)
from .sampler import GraphSample, RngStream, sample_naive, sample_poisson_collapse

__version__ = "0.1.0"

__all__ = [
    "AliasTable",
    "ExplicitQuantile",
    "GraphSample",
    "ParetoTail",
    "RngStream",
    "WeightSequence",
    "build_weights",
    "critical_cF",
    "exact_moments",
    "sample_naive",
    "sample_poisson_collapse",
]
