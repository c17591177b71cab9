"""
Parametric predict-then-optimize baseline.

Prediction phase: operate at m prices spread uniformly over [p_lo, p_hi],
each for θT/m time units, and record arrival counts. Fit the demand family
to the observed rates by least squares. Optimization phase: run the rest
of the horizon at the PK-optimal policy of the fitted model.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.analytic.optimizer import OptimalSolution, solve_optimal
from src.demand.fitting import FitResult, fit_least_squares
from src.demand.models import DemandFamily, DemandModel, PARAM_NAMES
from src.queue_sim.arrivals import ArrivalState, renewal_boundary_reset
from src.queue_sim.simulator import simulate_cycle
from src.queue_sim.trace import Policy, workload_integral
from src.stochastic.streams import RngStream
from src.system import QueueSystem
from src.utils.console import get_logger
from src.utils.errors import DomainError, FitError

logger = get_logger(__name__)

PREDICTION = "prediction"
OPTIMIZATION = "optimization"


@dataclass
class LedgerEntry:
    """One constant-policy stretch of a predict-then-optimize run."""
    phase: str
    t_start: float
    t_end: float
    mu: float
    p: float
    n_arrivals: int
    workload_integral: float
    cost: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass
class PtoResult:
    """Outcome of a predict-then-optimize run."""
    fit: FitResult
    fitted_model: DemandModel
    plan: OptimalSolution
    ledger: List[LedgerEntry]
    prices: np.ndarray
    rates: np.ndarray
    seed: int
    theta: float
    m: int
    total_time: float
    h0: float
    manifest: Dict[str, Any] = field(default_factory=dict)

    @property
    def x_hat(self) -> Policy:
        return self.plan.policy

    @property
    def final_policy(self) -> Policy:
        return self.plan.policy

    def phase_cost(self, phase: str) -> float:
        return float(sum(e.cost for e in self.ledger if e.phase == phase))

    @property
    def prediction_cost(self) -> float:
        return self.phase_cost(PREDICTION)

    @property
    def optimization_cost(self) -> float:
        return self.phase_cost(OPTIMIZATION)

    @property
    def total_cost(self) -> float:
        return float(sum(e.cost for e in self.ledger))

    def ledger_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "phase": e.phase, "t_start": e.t_start, "t_end": e.t_end,
                    "mu": e.mu, "p": e.p, "N": e.n_arrivals,
                    "workload_integral": e.workload_integral, "cost": e.cost,
                }
                for e in self.ledger
            ]
        )

    def summary(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "theta": self.theta,
            "m": self.m,
            "total_time": self.total_time,
            "family": self.fit.family.value,
            "fitted_params": self.fitted_model.named_params,
            "fit_converged": self.fit.converged,
            "fit_residual": self.fit.residual,
            "mu_hat": self.x_hat.mu,
            "p_hat": self.x_hat.p,
            "prediction_cost": self.prediction_cost,
            "optimization_cost": self.optimization_cost,
            "total_cost": self.total_cost,
        }


def _fitted_model(fit: FitResult, p_lo: float, p_hi: float) -> DemandModel:
    try:
        return fit.model(price_range=(p_lo, p_hi))
    except DomainError as e:
        raise FitError(
            f"Fitted {fit.family.value} curve {fit.params} is not a valid demand curve on "
            f"[{p_lo}, {p_hi}]: {e}",
            result=fit,
        ) from e


def run_ppto(
    system: QueueSystem,
    family: DemandFamily | str,
    theta: float,
    m: int,
    total_time: float,
    seed: int,
    explore_mu: Optional[float] = None,
    opt_chunks: int = 20,
    noise_free: bool = False,
    init: Optional[Sequence[float]] = None,
) -> PtoResult:
    """
    Run the predict-then-optimize baseline.

    Args:
        system: True system (simulation and cost accounting)
        family: Demand family to fit
        theta: Fraction of the horizon spent exploring, in (0, 1)
        m: Number of exploration prices
        total_time: Horizon T
        seed: Root seed; sub-phase i uses stream (seed, i)
        explore_mu: Capacity during exploration (default: box midpoint)
        opt_chunks: Number of equal stretches the optimization phase is
            recorded in
        noise_free: Replace counts by their expectations λ(p_i)·θT/m
        init: Starting parameters for iterative fits

    Returns:
        PtoResult with the fit, the plan x̂* and the cost ledger

    Raises:
        FitError: If the fit does not yield a valid demand curve
    """
    family = DemandFamily(family)
    if not 0.0 < theta < 1.0:
        raise DomainError(f"Exploration ratio must lie in (0, 1), got {theta}")
    if m < len(PARAM_NAMES[family]):
        raise DomainError(f"A {family.value} fit needs m >= {len(PARAM_NAMES[family])}, got {m}")
    if total_time <= 0:
        raise DomainError(f"Horizon must be positive, got {total_time}")

    box = system.box
    mu_explore = explore_mu if explore_mu is not None else box.midpoint()[0]
    prices = np.linspace(box.p_lo, box.p_hi, m)
    sub_length = theta * total_time / m
    root = RngStream(seed)

    ledger: List[LedgerEntry] = []
    workload, clock = 0.0, 0.0
    arrival_state: Optional[ArrivalState] = None

    def operate(index: int, phase: str, policy: Policy, length: float) -> int:
        nonlocal workload, clock, arrival_state
        process = system.arrival_process(policy.p)
        arrival_state = renewal_boundary_reset(arrival_state, process.rate)
        trace = simulate_cycle(workload, policy, length, process, system.service, root.child(index), state=arrival_state)
        area = workload_integral(trace, 0.0, length)
        cost = system.h0 * area + float(system.cost.value(policy.mu)) * length - policy.p * trace.n_arrivals
        ledger.append(LedgerEntry(phase, clock, clock + length, policy.mu, policy.p, trace.n_arrivals, area, cost))
        workload, arrival_state = trace.w_end, trace.arrival_state
        clock += length
        return trace.n_arrivals

    counts = np.array([
        operate(i, PREDICTION, Policy(mu_explore, p), sub_length)
        for i, p in enumerate(prices, start=1)
    ], dtype=float)

    if noise_free:
        rates = system.demand.rate(prices)
    else:
        rates = counts * m / (theta * total_time)

    fit = fit_least_squares(family, list(zip(prices, rates)), init=init)
    fitted = _fitted_model(fit, box.p_lo, box.p_hi)
    try:
        plan = solve_optimal(fitted, system.cost, system.h0, system.scv, box, require_stable_box=False)
    except DomainError as e:
        raise FitError(f"No stable plan under the fitted curve {fitted.named_params}: {e}", result=fit) from e
    logger.info(
        f"theta={theta:.3%}: fitted {fitted.named_params}, plan mu={plan.policy.mu:.4f} p={plan.policy.p:.4f}"
    )

    opt_length = (1.0 - theta) * total_time / opt_chunks
    for j in range(opt_chunks):
        operate(m + 1 + j, OPTIMIZATION, plan.policy, opt_length)

    return PtoResult(
        fit=fit, fitted_model=fitted, plan=plan, ledger=ledger, prices=prices, rates=np.asarray(rates),
        seed=seed, theta=theta, m=m, total_time=total_time, h0=system.h0,
        manifest={"seed": seed, "stream_keys": "(phase index,)", "explore_mu": mu_explore},
    )
