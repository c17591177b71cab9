"""Demand curves, staffing costs, curvature checks and least-squares fitting."""

from src.demand.assumptions import AssumptionReport, check_assumption1a
from src.demand.fitting import FitResult, fit_least_squares, sup_norm_error
from src.demand.models import (
    PARAM_NAMES,
    CostForm,
    DemandFamily,
    DemandModel,
    FeasibleBox,
    StaffingCost,
    eval,
    eval_d1,
    eval_d2,
)

__all__ = [
    "AssumptionReport",
    "check_assumption1a",
    "FitResult",
    "fit_least_squares",
    "sup_norm_error",
    "PARAM_NAMES",
    "CostForm",
    "DemandFamily",
    "DemandModel",
    "FeasibleBox",
    "StaffingCost",
    "eval",
    "eval_d1",
    "eval_d2",
]
