"""Optimization under first- and second-order stochastic dominance constraints.

A sample-based projected-ascent solver with utility-style dual
penalties, two benchmark problem families (portfolio allocation and
stochastic transport), constraint-violation metrics, and an exact
scenario-LP baseline with an embedded simplex solver.
"""

from .dual import (DualFunction, SupportInterval, ThresholdSet, dual_derivative,
                   dual_value, support_interval, violation_thresholds)
from .metrics import cvi, cvi_exact_k2, empirical_fk, evaluate_solution, obj_ratio
from .problems import (PortfolioProblem, TransportProblem, project_rows,
                       project_simplex)
from .scenario import (SampleStream, ScenarioBatch, build_gaussian_mixture,
                       build_smoothed_empirical, load_scenarios_csv,
                       poisson_mode_mixture, random_pd_factor, sample_batch)
from .solver import IterateTrace, Solution, SolverConfig, averaged_iterate, solve
from .baseline import (LinearProgram, LpResult, build_sdlp, greedy_portfolio,
                       greedy_transport, sdlp_portfolio, simplex_solve)

__version__ = "0.1.0"

__all__ = [
    "DualFunction", "SupportInterval", "ThresholdSet", "dual_derivative",
    "dual_value", "support_interval", "violation_thresholds",
    "cvi", "cvi_exact_k2", "empirical_fk", "evaluate_solution", "obj_ratio",
    "PortfolioProblem", "TransportProblem", "project_rows", "project_simplex",
    "SampleStream", "ScenarioBatch", "build_gaussian_mixture",
    "build_smoothed_empirical", "load_scenarios_csv", "poisson_mode_mixture",
    "random_pd_factor", "sample_batch",
    "IterateTrace", "Solution", "SolverConfig", "averaged_iterate", "solve",
    "LinearProgram", "LpResult", "build_sdlp", "greedy_portfolio",
    "greedy_transport", "sdlp_portfolio", "simplex_solve",
]
