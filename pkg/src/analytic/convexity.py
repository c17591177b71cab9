"""Grid diagnostics of convexity and strong monotonicity around the optimum."""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from src.analytic.objective import Objective, PKObjective
from src.analytic.optimizer import solve_objective
from src.demand.models import DemandModel, FeasibleBox, StaffingCost
from src.queue_sim.trace import Policy


@dataclass
class ConvexityReport:
    """
    Attributes:
        convex: det(H) > 0 and ∂pp f > 0 at every grid point
        min_det: Minimum Hessian determinant on the grid
        min_fpp: Minimum ∂²f/∂p² on the grid
        k0: min over the grid of (x - x*)ᵀ∇f(x) / ‖x - x*‖²
        nonconvex_fraction: Share of grid points failing either test
        worst_point: Grid point with the smallest determinant
        x_star: Reference optimum used for ``k0``
    """
    convex: bool
    min_det: float
    min_fpp: float
    k0: float
    nonconvex_fraction: float
    worst_point: Tuple[float, float]
    x_star: Tuple[float, float]

    def to_dict(self) -> Dict:
        return {
            "convex": self.convex,
            "min_det": self.min_det,
            "min_fpp": self.min_fpp,
            "k0": self.k0,
            "nonconvex_fraction": self.nonconvex_fraction,
            "worst_point": {"mu": self.worst_point[0], "p": self.worst_point[1]},
            "x_star": {"mu": self.x_star[0], "p": self.x_star[1]},
        }


def objective_convexity_report(
    objective: Objective,
    box: FeasibleBox,
    grid: int = 200,
    x_star: Optional[Policy] = None,
) -> ConvexityReport:
    """Convexity diagnostics for any objective; ``x_star`` defaults to its box optimum."""
    if x_star is None:
        x_star = solve_objective(objective, box).policy
    mu, p = box.mesh(grid)
    f_mm, f_mp, f_pp = objective.hessian_components(mu, p)
    det = f_mm * f_pp - f_mp**2
    g_mu, g_p = objective.gradient_components(mu, p)

    dx, dy = mu - x_star.mu, p - x_star.p
    dist2 = dx**2 + dy**2
    away = dist2 > 1e-12 * max(1.0, x_star.mu**2 + x_star.p**2)
    ratio = np.where(away, (dx * g_mu + dy * g_p) / np.where(away, dist2, 1.0), np.inf)

    bad = (det <= 0) | (f_pp <= 0)
    worst = np.unravel_index(int(np.argmin(det)), det.shape)
    return ConvexityReport(
        convex=not bool(np.any(bad)),
        min_det=float(np.min(det)),
        min_fpp=float(np.min(f_pp)),
        k0=float(np.min(ratio)),
        nonconvex_fraction=float(np.mean(bad)),
        worst_point=(float(mu[worst]), float(p[worst])),
        x_star=(x_star.mu, x_star.p),
    )


def convexity_report(
    demand: DemandModel,
    cost: StaffingCost,
    h0: float,
    scv: float,
    box: FeasibleBox,
    grid: int = 200,
) -> ConvexityReport:
    """
    Convexity diagnostics of the PK objective on a uniformly stable box.

    Raises:
        UnstablePolicyError: If the box is not uniformly stable
    """
    box.require_stable(demand)
    return objective_convexity_report(PKObjective(demand, cost, h0, scv), box, grid)
