"""Portfolio-theoretic camera selection under correlated disruptions."""

from ._portfolio_cam import (
    AvailabilityDist,
    CameraSpec,
    GaConfig,
    ModelError,
    PortfolioInputs,
    Scenario,
    ScenarioError,
    Solution,
    baseline_top_expected,
    beta_mean,
    beta_std,
    build_portfolio_inputs,
    compare_strategies,
    constraint_violation,
    factor_correlation,
    ga_solve,
    grid_oracle_solve,
    is_feasible,
    load_scenario,
    objective_value,
    parse_scenario,
    quality_value,
    sample_availability,
    uniform_random_baseline,
)

__all__ = [
    "AvailabilityDist",
    "CameraSpec",
    "GaConfig",
    "ModelError",
    "PortfolioInputs",
    "Scenario",
    "ScenarioError",
    "Solution",
    "baseline_top_expected",
    "beta_mean",
    "beta_std",
    "build_portfolio_inputs",
    "compare_strategies",
    "constraint_violation",
    "factor_correlation",
    "ga_solve",
    "grid_oracle_solve",
    "is_feasible",
    "load_scenario",
    "objective_value",
    "parse_scenario",
    "quality_value",
    "sample_availability",
    "uniform_random_baseline",
]
