"""Markov binomial laws and their compound Poisson approximations."""

from .approx import (
    ApproximantId,
    DerivedParams,
    build,
    derive,
    geometric_G,
    geometric_factorial_moments,
    inverse_H,
)
from .errors import DomainError, ResourceLimitError, UsageError
from .insurance import Portfolio, RiskGroup, aggregate_cp, aggregate_exact, cp_distance_report
from .markov import (
    MBParams,
    brute_force,
    eigen_component_measures,
    eigen_components_hat,
    exact_dp,
    exact_spectral,
    mean_formula,
)
from .measure import (
    LatticeMeasure,
    add,
    char_fn,
    convolve,
    distance,
    exp_measure,
    identity,
    log_measure,
    norm,
    point_mass,
    power,
    scale,
    scale_support,
    subtract,
    truncate,
)

__version__ = "0.1.0"

__all__ = [
    "ApproximantId",
    "DerivedParams",
    "DomainError",
    "LatticeMeasure",
    "MBParams",
    "Portfolio",
    "ResourceLimitError",
    "RiskGroup",
    "UsageError",
    "add",
    "aggregate_cp",
    "aggregate_exact",
    "brute_force",
    "build",
    "char_fn",
    "convolve",
    "cp_distance_report",
    "derive",
    "distance",
    "eigen_component_measures",
    "eigen_components_hat",
    "exact_dp",
    "exact_spectral",
    "exp_measure",
    "geometric_G",
    "geometric_factorial_moments",
    "identity",
    "inverse_H",
    "log_measure",
    "mean_formula",
    "norm",
    "point_mass",
    "power",
    "scale",
    "scale_support",
    "subtract",
    "truncate",
]
