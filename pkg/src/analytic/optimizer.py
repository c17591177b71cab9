"""
Global optimum of an objective over the decision box.

A coarse grid locates the basin; Nelder–Mead and L-BFGS-B refine it; a few
projected Newton steps polish the result until the projected gradient is
below tolerance.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy.optimize import minimize

from src.analytic.objective import Objective, PKObjective
from src.demand.models import DemandModel, FeasibleBox, StaffingCost
from src.queue_sim.trace import Policy
from src.utils.console import get_logger
from src.utils.errors import DomainError, UnstablePolicyError

logger = get_logger(__name__)

GRID_POINTS = 400
GRADIENT_TOLERANCE = 1e-8
NEWTON_STEPS = 20


@dataclass
class OptimalSolution:
    """Optimal policy with its cost rate f*, profit -f* and load ρ*."""
    policy: Policy
    f_star: float
    rho_star: float
    grad_norm: float

    @property
    def profit(self) -> float:
        return -self.f_star

    def to_dict(self) -> Dict[str, float]:
        return {
            "mu_star": self.policy.mu,
            "p_star": self.policy.p,
            "f_star": self.f_star,
            "profit_star": self.profit,
            "rho_star": self.rho_star,
            "projected_grad_norm": self.grad_norm,
        }


def projected_gradient(grad: np.ndarray, x: np.ndarray, box: FeasibleBox, tol: float = 1e-12) -> np.ndarray:
    """Gradient with components zeroed where they push out of an active bound."""
    g = np.array(grad, dtype=float)
    at_lower = x <= box.lower + tol
    at_upper = x >= box.upper - tol
    g[at_lower & (g > 0)] = 0.0
    g[at_upper & (g < 0)] = 0.0
    return g


def _newton_polish(objective: Objective, x: np.ndarray, box: FeasibleBox) -> np.ndarray:
    for _ in range(NEWTON_STEPS):
        g = objective.gradient(*x)
        pg = projected_gradient(g, x, box)
        if np.linalg.norm(pg) <= GRADIENT_TOLERANCE:
            break
        free = pg != 0.0
        hess = objective.hessian(*x)[np.ix_(free, free)]
        try:
            step_free = np.linalg.solve(hess, g[free])
        except np.linalg.LinAlgError:
            break
        step = np.zeros(2)
        step[free] = step_free
        candidate = box.clip(x - step)
        if not np.isfinite(objective.values(*candidate)) or (
            objective.values(*candidate) > objective.values(*x) + 1e-12
        ):
            break
        x = candidate
    return x


def solve_objective(objective: Objective, box: FeasibleBox, grid: int = GRID_POINTS) -> OptimalSolution:
    """
    Minimize ``objective`` over ``box``.

    Args:
        objective: Any Objective; unstable policies evaluate to +inf
        box: Decision box
        grid: Points per axis of the initial scan

    Returns:
        OptimalSolution

    Raises:
        DomainError: If no stable policy exists in the box
    """
    mu_grid, p_grid = box.mesh(grid)
    values = objective.values(mu_grid, p_grid)
    if not np.any(np.isfinite(values)):
        raise DomainError("No stable policy in the feasible box")
    idx = np.unravel_index(int(np.argmin(values)), values.shape)
    x = np.array([mu_grid[idx], p_grid[idx]])

    def fun(v):
        return float(objective.values(v[0], v[1]))

    simplex = minimize(
        fun, x, method="Nelder-Mead", bounds=box.bounds,
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
    )
    if np.isfinite(simplex.fun) and simplex.fun <= fun(x):
        x = box.clip(simplex.x)

    def jac(v):
        return objective.gradient(v[0], v[1])

    try:
        refined = minimize(fun, x, jac=jac, method="L-BFGS-B", bounds=box.bounds,
                           options={"gtol": 1e-12, "ftol": 1e-15, "maxiter": 500})
        if np.isfinite(refined.fun) and refined.fun <= fun(x):
            x = box.clip(refined.x)
        x = _newton_polish(objective, x, box)
    except UnstablePolicyError:
        # the line search left the stable region; keep the simplex point
        logger.debug("gradient refinement stepped into an unstable policy")

    grad_norm = float(np.linalg.norm(projected_gradient(objective.gradient(*x), x, box)))
    policy = Policy.from_array(x)
    f_star = objective.value(policy.mu, policy.p)
    rho_star = float(objective.rho(policy.mu, policy.p))
    logger.debug(f"optimum mu={policy.mu:.6f} p={policy.p:.6f} f={f_star:.6f} |pg|={grad_norm:.2e}")
    return OptimalSolution(policy, f_star, rho_star, grad_norm)


def solve_optimal(
    demand: DemandModel,
    cost: StaffingCost,
    h0: float,
    scv: float,
    box: FeasibleBox,
    grid: int = GRID_POINTS,
    require_stable_box: bool = True,
) -> OptimalSolution:
    """
    Optimal (μ*, p*) of the PK objective over the box.

    Args:
        demand: Demand curve
        cost: Staffing cost
        h0: Holding cost rate
        scv: Service SCV
        box: Decision box
        grid: Points per axis of the initial scan
        require_stable_box: Reject boxes that are not uniformly stable

    Returns:
        OptimalSolution with policy*, f*, ρ* = λ(p*)/μ*
    """
    if require_stable_box:
        box.require_stable(demand)
    return solve_objective(PKObjective(demand, cost, h0, scv), box, grid)
