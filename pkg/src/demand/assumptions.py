"""
Numerical check of the demand-curvature condition.

Convexity of the PK objective on a box follows from two sufficient
inequalities on λ(p):

    (slope)    -λ'(p) > max( sqrt((0 ∨ -λ''(p)(μ̄ - λ(p))) / 2),  p λ''(p) / 2 )
    (hessian)   λ'(p) > max_μ ( 2 g(μ) λ''(p) λ(p) / λ'(p) - 4 λ(p)(μ - λ(p)) / (h0 C) )

with g(μ) = μ/(μ - λ) - p(μ - λ)/(h0 C) and C = (1 + c_s²)/2. Both are
evaluated on a grid; the report carries the minimum slack of each and the
grid point where the tighter one is worst.
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from src.demand.models import DemandModel, FeasibleBox


@dataclass
class AssumptionReport:
    """Outcome of a grid check of the demand-curvature condition."""
    holds: bool
    worst_point: Tuple[float, float]
    margins: Dict[str, float] = field(default_factory=dict)
    grid: int = 200

    def to_dict(self) -> Dict:
        return {
            "holds": self.holds,
            "worst_point": {"mu": self.worst_point[0], "p": self.worst_point[1]},
            "margins": dict(self.margins),
            "grid": self.grid,
        }


def slope_slack(model: DemandModel, box: FeasibleBox, p) -> np.ndarray:
    """Slack of the first-derivative inequality at prices ``p``."""
    lam, d1, d2 = model.rate(p), model.d1(p), model.d2(p)
    curvature_term = np.sqrt(np.maximum(0.0, -d2 * (box.mu_hi - lam)) / 2.0)
    return -d1 - np.maximum(curvature_term, p * d2 / 2.0)


def hessian_slack(model: DemandModel, mu, p, h0: float, scv: float) -> np.ndarray:
    """Slack of the Hessian inequality at each (mu, p)."""
    h0c = h0 * (1.0 + scv) / 2.0
    lam, d1, d2 = model.rate(p), model.d1(p), model.d2(p)
    gap = mu - lam
    g = mu / gap - p * gap / h0c
    return d1 - 2.0 * g * d2 * lam / d1 + 4.0 * lam * gap / h0c


def check_assumption1a(
    model: DemandModel,
    box: FeasibleBox,
    h0: float,
    scv: float,
    grid: int = 200,
) -> AssumptionReport:
    """
    Check the demand-curvature condition on a grid over the box.

    Args:
        model: Demand curve
        box: Decision box; must be uniformly stable
        h0: Holding cost rate
        scv: Service-time squared coefficient of variation
        grid: Points per axis

    Returns:
        AssumptionReport with pass/fail and minimum slacks

    Raises:
        UnstablePolicyError: If the box is not uniformly stable
    """
    box.require_stable(model)
    mu, p = box.mesh(grid)

    slope = slope_slack(model, box, p[0])
    hess = hessian_slack(model, mu, p, h0, scv)
    # the Hessian inequality must hold for every μ, so take the worst μ per price
    hess_by_price = hess.min(axis=0)

    i_slope = int(np.argmin(slope))
    i_hess = np.unravel_index(int(np.argmin(hess)), hess.shape)
    margins = {
        "slope": float(slope[i_slope]),
        "hessian": float(hess_by_price.min()),
    }

    if margins["slope"] <= margins["hessian"]:
        worst = (float(box.mu_hi), float(p[0][i_slope]))
    else:
        worst = (float(mu[i_hess]), float(p[i_hess]))

    return AssumptionReport(
        holds=bool(margins["slope"] > 0 and margins["hessian"] > 0),
        worst_point=worst,
        margins=margins,
        grid=grid,
    )
