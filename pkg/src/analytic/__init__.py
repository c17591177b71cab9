"""Analytic benchmarks: PK objective, derivatives, optimum, convexity and GI/M/1."""

from src.analytic.convexity import ConvexityReport, convexity_report, objective_convexity_report
from src.analytic.gim1 import (
    GIM1Objective,
    GIM1Result,
    gim1_root,
    gim1_steady_state,
    swapped_readings,
)
from src.analytic.objective import (
    Objective,
    PKObjective,
    QuadraticObjective,
    grad_f,
    hessian_f,
    mixed_partial_coefficient,
    objective_f,
    pk_mean_workload,
)
from src.analytic.optimizer import (
    OptimalSolution,
    projected_gradient,
    solve_objective,
    solve_optimal,
)

__all__ = [
    "ConvexityReport",
    "convexity_report",
    "objective_convexity_report",
    "GIM1Objective",
    "GIM1Result",
    "gim1_root",
    "gim1_steady_state",
    "swapped_readings",
    "Objective",
    "PKObjective",
    "QuadraticObjective",
    "grad_f",
    "hessian_f",
    "mixed_partial_coefficient",
    "objective_f",
    "pk_mean_workload",
    "OptimalSolution",
    "projected_gradient",
    "solve_objective",
    "solve_optimal",
]
