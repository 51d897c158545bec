"""Equilibrium stopping policies under alpha-maxmin volatility ambiguity."""

from ._equistop import (
    GridPolicy,
    HittingEstimate,
    InvalidInput,
    NonConvergence,
    NumericalFailure,
    Objective,
    PriorFamily,
    PutGbmProblem,
    StateGrid,
    ValueProfile,
    a_star,
    alpha_maxmin_value,
    build_grid,
    compare_equilibria,
    crossing_point,
    discounted_hitting_factor,
    estimate_put_hitting_value,
    exponents,
    is_equilibrium,
    is_equilibrium_threshold,
    iterate_to_equilibrium,
    lambda_value,
    run_cli,
    snapped_threshold_policy,
    theta,
    value_of_equilibrium,
)

__all__ = [
    "GridPolicy",
    "HittingEstimate",
    "InvalidInput",
    "NonConvergence",
    "NumericalFailure",
    "Objective",
    "PriorFamily",
    "PutGbmProblem",
    "StateGrid",
    "ValueProfile",
    "a_star",
    "alpha_maxmin_value",
    "build_grid",
    "compare_equilibria",
    "crossing_point",
    "discounted_hitting_factor",
    "estimate_put_hitting_value",
    "exponents",
    "is_equilibrium",
    "is_equilibrium_threshold",
    "iterate_to_equilibrium",
    "lambda_value",
    "run_cli",
    "snapped_threshold_policy",
    "theta",
    "value_of_equilibrium",
]
