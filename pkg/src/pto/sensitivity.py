"""
Profit loss from planning with a deflated demand curve.

For each holding cost h0 the true optimum is compared with the optimum of
λ̂(p) = (1 - ε)λ(p), both evaluated under the true model. The loss grows
sharply as the optimal load approaches one because the PK workload is
hypersensitive to the arrival rate there.
"""

from dataclasses import asdict, dataclass
from typing import List, Sequence

import numpy as np
import pandas as pd

from src.analytic.objective import PKObjective
from src.analytic.optimizer import solve_optimal
from src.demand.models import DemandModel, FeasibleBox, StaffingCost
from src.utils.errors import DomainError

DEFAULT_H0_LIST = (1.0, 0.4, 0.15, 0.05, 0.02, 0.001)


@dataclass
class SensitivityRow:
    """
    One holding-cost setting.

    ``unstable`` marks plans whose true load is at least one; their profit
    is -inf, the loss +inf and the workload error 1 (the model predicts a
    finite workload for an exploding queue).
    """
    h0: float
    rho_star: float
    mu_star: float
    p_star: float
    mu_hat: float
    p_hat: float
    rho_hat_true: float
    profit_star: float
    profit_hat: float
    relative_loss: float
    workload_error: float
    unstable: bool


def sensitivity_misspecification(
    demand: DemandModel,
    cost: StaffingCost,
    scv: float,
    box: FeasibleBox,
    epsilon: float,
    h0_list: Sequence[float] = DEFAULT_H0_LIST,
) -> List[SensitivityRow]:
    """
    Relative profit loss and workload error under ε-deflated demand.

    Args:
        demand: True demand curve
        cost: Staffing cost
        scv: Service SCV
        box: Decision box (need not be uniformly stable)
        epsilon: Deflation ε in [0, 1)
        h0_list: Holding costs to sweep

    Returns:
        One SensitivityRow per h0, in the given order
    """
    if not 0.0 <= epsilon < 1.0:
        raise DomainError(f"Misspecification level must lie in [0, 1), got {epsilon}")
    believed = demand.with_scale(demand.scale * (1.0 - epsilon))
    rows = []

    for h0 in h0_list:
        truth = PKObjective(demand, cost, h0, scv)
        model = PKObjective(believed, cost, h0, scv)
        best = solve_optimal(demand, cost, h0, scv, box, require_stable_box=False)
        plan = best if epsilon == 0.0 else solve_optimal(believed, cost, h0, scv, box, require_stable_box=False)
        mu_hat, p_hat = plan.policy.mu, plan.policy.p

        true_value = float(truth.values(mu_hat, p_hat))
        unstable = not np.isfinite(true_value)
        profit_hat = -np.inf if unstable else -true_value
        loss = (best.profit - profit_hat) / best.profit

        if unstable:
            workload_error = 1.0
        else:
            actual = truth.mean_workload(mu_hat, p_hat)
            predicted = model.mean_workload(mu_hat, p_hat)
            workload_error = (actual - predicted) / actual if actual > 0 else 0.0

        rows.append(SensitivityRow(
            h0=h0, rho_star=best.rho_star, mu_star=best.policy.mu, p_star=best.policy.p,
            mu_hat=mu_hat, p_hat=p_hat, rho_hat_true=float(truth.rho(mu_hat, p_hat)),
            profit_star=best.profit, profit_hat=float(profit_hat),
            relative_loss=float(loss), workload_error=float(workload_error), unstable=unstable,
        ))
    return rows


def sensitivity_frame(rows: Sequence[SensitivityRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in rows])
