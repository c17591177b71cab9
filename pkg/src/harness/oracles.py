"""Simulator self-checks run by ``validate-sim``."""

from dataclasses import asdict, dataclass
from typing import Dict, List

import numpy as np
from scipy import stats

from src.analytic.gim1 import GIM1Objective, gim1_steady_state, swapped_readings
from src.analytic.objective import pk_mean_workload
from src.analytic.optimizer import solve_objective
from src.harness.presets import BASE_BOX, BASE_COST, BASE_DEMAND
from src.queue_sim.arrivals import ArrivalProcess, ArrivalState, arrival_epochs
from src.queue_sim.diagnostics import censoring_error_profile, long_run_average_workload
from src.stochastic.distributions import UnitDist
from src.stochastic.streams import RngStream
from src.utils.console import get_logger

logger = get_logger(__name__)

PK_LOADS = (0.5, 0.7, 0.9)
# Time averages mix slowly near saturation; rho = 0.9 runs ten times longer.
PK_HORIZON_SCALE = {0.5: 1.0, 0.7: 1.0, 0.9: 10.0}
PK_TOLERANCE = 0.02
E2M1_LOAD = 0.7
CONSERVATION_TOLERANCE = 1e-9
CENSORING_MARGIN = 10.0
CENSORING_BOUND = 0.01
COUNT_SIGNIFICANCE = 0.01


@dataclass
class OracleCheck:
    name: str
    observed: float
    expected: float
    tolerance: float
    passed: bool

    def to_dict(self) -> Dict:
        return asdict(self)


def _relative_check(name: str, observed: float, expected: float, tolerance: float) -> OracleCheck:
    passed = abs(observed - expected) <= tolerance * abs(expected)
    return OracleCheck(name, observed, expected, tolerance, passed)


def poisson_dispersion_pvalue(rate: float, duration: float, n_windows: int, seed: int) -> float:
    """
    p-value of the index-of-dispersion test on ``n_windows`` independent
    arrival counts over windows of length ``duration``.
    """
    process = ArrivalProcess.poisson(rate)
    root = RngStream(seed)
    counts = np.array([
        len(arrival_epochs(ArrivalState(process), duration, root.child(i))[0])
        for i in range(n_windows)
    ], dtype=float)
    mean = counts.mean()
    statistic = float(np.sum((counts - mean) ** 2) / mean)
    upper = stats.chi2.sf(statistic, n_windows - 1)
    return float(2.0 * min(upper, 1.0 - upper))


def simulator_oracles(seed: int = 0, quick: bool = True) -> List[OracleCheck]:
    """
    Compare the simulator with closed forms.

    * long-run mean workload of M/M/1 at loads 0.5, 0.7, 0.9 against PK
    * long-run mean workload of E2/M/1 at load 0.7 against the GI/M/1 root
    * arrival rate recovered from the same paths
    * exact work conservation on every chunk
    * censoring error ten service times before the end of a cycle
    * Poisson counts (dispersion test at the 1% level)

    Args:
        seed: Root seed
        quick: Base horizon 10⁶ and 2000 censoring traces instead of 10⁷ and 10⁴
    """
    horizon = 1e6 if quick else 1e7
    n_traces = 2000 if quick else 10000

    checks: List[OracleCheck] = []
    worst_gap = 0.0
    exponential = UnitDist.exponential()
    for i, rho in enumerate(PK_LOADS):
        pk_horizon = horizon * PK_HORIZON_SCALE[rho]
        result = long_run_average_workload(ArrivalProcess.poisson(rho), 1.0, pk_horizon, exponential, seed + i)
        worst_gap = max(worst_gap, result["max_conservation_gap"])
        checks.append(_relative_check(
            f"pk-mean-workload rho={rho}", result["mean_workload"], pk_mean_workload(rho, 1.0, 1.0), PK_TOLERANCE,
        ))
        checks.append(_relative_check(f"arrival-rate rho={rho}", result["arrivals"] / pk_horizon, rho, 0.01))

    erlang = UnitDist.erlang(2)
    result = long_run_average_workload(
        ArrivalProcess.renewal(E2M1_LOAD, erlang), 1.0, horizon, exponential, seed + len(PK_LOADS) + 2,
    )
    worst_gap = max(worst_gap, result["max_conservation_gap"])
    checks.append(_relative_check(
        f"gim1-mean-workload E2/M/1 rho={E2M1_LOAD}", result["mean_workload"],
        gim1_steady_state(erlang, E2M1_LOAD, 1.0).mean_workload, PK_TOLERANCE,
    ))

    checks.append(OracleCheck("work-conservation", worst_gap, 0.0, CONSERVATION_TOLERANCE,
                              worst_gap <= CONSERVATION_TOLERANCE))

    profile = censoring_error_profile(0.3, 1.0, 40.0, [CENSORING_MARGIN], n_traces, seed + len(PK_LOADS))
    error = profile[CENSORING_MARGIN]
    checks.append(OracleCheck("censoring-error m=10", error, 0.0, CENSORING_BOUND, error <= CENSORING_BOUND))

    p_value = poisson_dispersion_pvalue(2.0, 50.0, n_traces, seed + len(PK_LOADS) + 1)
    checks.append(OracleCheck("poisson-dispersion p-value", p_value, 1.0, COUNT_SIGNIFICANCE,
                              p_value >= COUNT_SIGNIFICANCE))

    for check in checks:
        logger.debug(f"{check.name}: observed={check.observed:.6g} passed={check.passed}")
    return checks


def e2m1_readings() -> Dict[str, float]:
    """
    E2/M/1 objective (h0 = c0 = 1) at its own optimum and at (3.75, 7.78)
    read in both argument orders.
    """
    objective = GIM1Objective(BASE_DEMAND, BASE_COST, 1.0, UnitDist.erlang(2))
    optimum = solve_objective(objective, BASE_BOX)
    readings = {
        "optimum mu": optimum.policy.mu,
        "optimum p": optimum.policy.p,
        "optimum f": optimum.f_star,
    }
    readings.update(swapped_readings(objective))
    return readings
