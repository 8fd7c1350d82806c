"""Moment operators, marginals and determinacy diagnostics for phase space
observables generated by number states."""

from .moments import (
    AxisSet,
    DeterminacyReport,
    MeasureRep,
    MomentSequence,
    determinacy_report,
    exp_bound_integral,
    marginal_moments,
    moment,
    moment_match,
    translate_moments,
)
from .povm import (
    FockVector,
    TruncatedOperator,
    diagonal_density,
    exp_bound_closed_form,
    fit_diagonal_polynomial,
    moment_matrix_element,
    moment_operator,
    normal_ordered_operator,
    pair_density,
    polarization_reconstruct,
    povm_element,
    sample_outcomes,
)
from .quadrature import QuadratureScheme, Region, integrate_plane, integrate_region, radial_angular

__version__ = "0.1.0"

__all__ = [
    "AxisSet",
    "DeterminacyReport",
    "FockVector",
    "MeasureRep",
    "MomentSequence",
    "QuadratureScheme",
    "Region",
    "TruncatedOperator",
    "determinacy_report",
    "diagonal_density",
    "exp_bound_closed_form",
    "exp_bound_integral",
    "fit_diagonal_polynomial",
    "integrate_plane",
    "integrate_region",
    "marginal_moments",
    "moment",
    "moment_match",
    "moment_matrix_element",
    "moment_operator",
    "normal_ordered_operator",
    "pair_density",
    "polarization_reconstruct",
    "povm_element",
    "radial_angular",
    "sample_outcomes",
    "translate_moments",
]
