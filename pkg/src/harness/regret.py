"""
Realized regret of a run against the full-information optimum.

Cycle l contributes R_l = ρ_l - T_l f(x*), where ρ_l is the realized cost
h0 ∫W + c(μ_l)T_l - p_l N_l over the whole cycle (no trimming: regret is
actual cost, unlike the estimator the learner uses).
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.analytic.objective import Objective
from src.demand.models import StaffingCost
from src.liquar.engine import RunResult
from src.pto.ppto import PtoResult
from src.queue_sim.trace import CycleTrace, workload_integral
from src.utils.errors import DomainError


def realized_cost(h0: float, cost: StaffingCost, mu: float, p: float, duration: float,
                  n_arrivals: int, area: float) -> float:
    """h0·∫W + c(μ)T - pN."""
    return h0 * area + float(cost.value(mu)) * duration - p * n_arrivals


def cycle_cost(trace: CycleTrace, h0: float, cost: StaffingCost) -> float:
    """Realized cost ρ_l of one finished cycle."""
    return realized_cost(
        h0, cost, trace.mu, trace.policy.p, trace.duration, trace.n_arrivals,
        workload_integral(trace, 0.0, trace.duration),
    )


def cost_ledger(run: Union[RunResult, PtoResult]) -> Tuple[np.ndarray, np.ndarray]:
    """(durations, realized costs) of every constant-policy stretch, in order."""
    if isinstance(run, RunResult):
        durations = np.array([c.duration for c in run.cycles])
        costs = np.array([
            realized_cost(run.h0, run.cost, c.mu, c.p, c.duration, c.n_arrivals, c.workload_integral)
            for c in run.cycles
        ])
        return durations, costs
    if isinstance(run, PtoResult):
        return (
            np.array([e.duration for e in run.ledger]),
            np.array([e.cost for e in run.ledger]),
        )
    raise TypeError(f"Cannot build a cost ledger from {type(run).__name__}")


@dataclass
class RegretReport:
    """
    Cumulative regret sampled at stretch boundaries.

    Attributes:
        times: Elapsed time T(l) at the end of each stretch
        cumulative: R at each boundary
        costs: Realized cost ρ_l of each stretch
        f_star: Per-time optimal cost used as baseline
    """
    times: np.ndarray
    cumulative: np.ndarray
    costs: np.ndarray
    f_star: float
    seeds: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def profit_star(self) -> float:
        return -self.f_star

    @property
    def relative(self) -> np.ndarray:
        """R(t) / (P(x*)·t)."""
        return self.cumulative / (self.profit_star * self.times)

    @property
    def final_regret(self) -> float:
        return float(self.cumulative[-1])

    @property
    def final_relative(self) -> float:
        return float(self.relative[-1])

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "time": self.times,
            "cycle_cost": self.costs,
            "cumulative_regret": self.cumulative,
            "relative_regret": self.relative,
        })


def regret_from_ledger(durations: Sequence[float], costs: Sequence[float], f_star: float) -> RegretReport:
    """Cumulative regret of an explicit (duration, cost) ledger."""
    durations = np.asarray(durations, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if durations.shape != costs.shape or durations.size == 0:
        raise DomainError("A ledger needs one cost per stretch and at least one stretch")
    return RegretReport(
        times=np.cumsum(durations),
        cumulative=np.cumsum(costs - durations * f_star),
        costs=costs,
        f_star=f_star,
    )


def regret_curve(run: Union[RunResult, PtoResult], f_star: float) -> RegretReport:
    """
    Regret of a learning or predict-then-optimize run.

    Args:
        run: RunResult or PtoResult
        f_star: Optimal cost rate f(x*)

    Returns:
        RegretReport sampled at every cycle (or ledger stretch) boundary
    """
    durations, costs = cost_ledger(run)
    report = regret_from_ledger(durations, costs, f_star)
    report.seeds = (run.seed,)
    return report


# ═══════════════════════════════════════════════════════════════════════════════
# DECOMPOSITION
# ═══════════════════════════════════════════════════════════════════════════════

def regret_decomposition(run: RunResult, objective: Objective, f_star: float) -> pd.DataFrame:
    """
    Split each iteration's realized regret into three parts.

    suboptimality      2T_k (f(x̄_k) - f*)
    finite_difference  T_k (f(x_{2k-1}) + f(x_{2k}) - 2 f(x̄_k))
    nonstationarity    (ρ_{2k-1} - T_k f(x_{2k-1})) + (ρ_{2k} - T_k f(x_{2k}))

    The three columns sum to ``total`` exactly (up to rounding); entries are
    infinite where a policy is unstable under the objective.
    """
    _, costs = cost_ledger(run)
    rows = []
    for i, record in enumerate(run.records):
        T_k = run.cycles[2 * i].duration
        f_bar = float(objective.values(record.xbar.mu, record.xbar.p))
        f_minus = float(objective.values(record.x_minus.mu, record.x_minus.p))
        f_plus = float(objective.values(record.x_plus.mu, record.x_plus.p))
        rho_minus, rho_plus = costs[2 * i], costs[2 * i + 1]
        rows.append({
            "k": record.k,
            "suboptimality": 2.0 * T_k * (f_bar - f_star),
            "finite_difference": T_k * (f_minus + f_plus - 2.0 * f_bar),
            "nonstationarity": (rho_minus - T_k * f_minus) + (rho_plus - T_k * f_plus),
            "total": rho_minus + rho_plus - 2.0 * T_k * f_star,
        })
    return pd.DataFrame(rows)


# ═══════════════════════════════════════════════════════════════════════════════
# LOG-LOG FIT
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass
class LogLogFit:
    """Least-squares line through (log t, log R)."""
    slope: float
    intercept: float
    n_points: int
    n_excluded: int
    t_range: Tuple[float, float]

    def to_dict(self) -> Dict[str, float]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "n_points": self.n_points,
            "n_excluded": self.n_excluded,
            "t_min": self.t_range[0],
            "t_max": self.t_range[1],
        }


def loglog_slope(report, fit_fraction: float = 0.8) -> LogLogFit:
    """
    Fit log R against log t over the last ``fit_fraction`` of log-time.

    Points with non-positive regret in that range are dropped and counted.

    Args:
        report: Anything with ``times`` and ``cumulative`` arrays
        fit_fraction: Share of the log-time span (ending at the last point) to fit

    Raises:
        DomainError: Fewer than two usable points
    """
    if not 0.0 < fit_fraction <= 1.0:
        raise DomainError(f"fit_fraction must lie in (0, 1], got {fit_fraction}")
    t = np.asarray(report.times, dtype=float)
    r = np.asarray(report.cumulative, dtype=float)
    positive_time = t > 0
    t, r = t[positive_time], r[positive_time]
    if t.size < 2:
        raise DomainError("Need at least two positive time points for a log-log fit")

    log_t = np.log(t)
    cutoff = log_t[-1] - fit_fraction * (log_t[-1] - log_t[0])
    window = log_t >= cutoff - 1e-12
    usable = window & (r > 0)
    n_excluded = int(np.sum(window & ~usable))
    if usable.sum() < 2:
        raise DomainError(f"Only {int(usable.sum())} positive regret points in the fit range")

    slope, intercept = np.polyfit(log_t[usable], np.log(r[usable]), 1)
    return LogLogFit(float(slope), float(intercept), int(usable.sum()), n_excluded,
                     (float(t[usable][0]), float(t[usable][-1])))
