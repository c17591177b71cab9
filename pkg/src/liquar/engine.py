"""
Online learning of (μ, p) by paired finite-difference cycles.

Each iteration k operates the system for two cycles of length T_k at the
perturbed policies x̄_k ∓ δ_k Z_k / 2, estimates each cycle's cost rate from
the observable (censored, trimmed) workload, forms the finite-difference
gradient and takes a projected step. Workload carries over between cycles.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.demand.models import FeasibleBox, StaffingCost
from src.liquar.schedule import HyperSchedule
from src.queue_sim.arrivals import ArrivalState, renewal_boundary_reset
from src.queue_sim.simulator import simulate_cycle
from src.queue_sim.trace import CycleTrace, Policy, observed_workload_integral, workload_integral
from src.stochastic.streams import Purpose, RngStream, cycle_stream
from src.system import QueueSystem
from src.utils.console import get_logger
from src.utils.errors import ConfigError, DomainError

logger = get_logger(__name__)

DIRECTIONS = (np.array([0.0, 2.0]), np.array([2.0, 0.0]))
ESTIMATORS = ("trimmed", "full")


# ═══════════════════════════════════════════════════════════════════════════════
# RECORDS
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass
class CycleSummary:
    """What a finished cycle leaves behind for estimation and regret."""
    k: int
    l: int
    mu: float
    p: float
    duration: float
    n_arrivals: int
    w0: float
    w_end: float
    workload_integral: float
    fhat: float


@dataclass
class IterationRecord:
    """
    One iteration of the learner.

    ``degenerate`` marks iterations where clamping to the box collapsed the
    perturbation on the active coordinate, so no gradient was formed.
    """
    k: int
    xbar: Policy
    Z: Tuple[float, float]
    x_minus: Policy
    x_plus: Policy
    delta: float
    delta_eff: float
    eta: float
    fhat_minus: float
    fhat_plus: float
    H: Tuple[float, float]
    w_handoff: float
    degenerate: bool = False


@dataclass
class RunResult:
    """Full trajectory of one learning run."""
    records: List[IterationRecord]
    cycles: List[CycleSummary]
    final_policy: Policy
    seed: int
    h0: float
    cost: StaffingCost
    manifest: Dict[str, Any] = field(default_factory=dict)

    def cycles_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "k": c.k, "l": c.l, "mu": c.mu, "p": c.p, "T_k": c.duration,
                    "N_l": c.n_arrivals, "w0": c.w0, "w_end": c.w_end,
                    "workload_integral": c.workload_integral, "fhat": c.fhat,
                }
                for c in self.cycles
            ]
        )

    def iterations_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "k": r.k, "xbar_mu": r.xbar.mu, "xbar_p": r.xbar.p,
                    "Z": f"({r.Z[0]:.0f},{r.Z[1]:.0f})", "delta": r.delta,
                    "delta_eff": r.delta_eff, "eta": r.eta,
                    "fhat_minus": r.fhat_minus, "fhat_plus": r.fhat_plus,
                    "H_mu": r.H[0], "H_p": r.H[1], "w_handoff": r.w_handoff,
                    "degenerate": r.degenerate,
                }
                for r in self.records
            ]
        )

    def trajectory(self) -> np.ndarray:
        """x̄_1..x̄_L followed by the final policy, as an (L+1)×2 array."""
        points = [r.xbar.as_array() for r in self.records] + [self.final_policy.as_array()]
        return np.vstack(points)


# ═══════════════════════════════════════════════════════════════════════════════
# BUILDING BLOCKS
# ═══════════════════════════════════════════════════════════════════════════════

def iteration_stream(seed: int, k: int) -> RngStream:
    """Parent stream shared by both cycles of iteration k."""
    return cycle_stream(seed, 2 * k - 1)


def draw_direction(rng: RngStream) -> np.ndarray:
    """Z uniform on {(0, 2), (2, 0)}."""
    return DIRECTIONS[int(rng.integers(0, 2))].copy()


def estimate_performance(
    trace: CycleTrace,
    alpha: float,
    h0: float,
    cost: StaffingCost,
    estimator: str = "trimmed",
) -> float:
    """
    Estimated cost rate of a finished cycle.

    ``trimmed``:  -pN/T + h0/((1-2α)T) ∫_{αT}^{(1-α)T} Ŵ(t) dt + c(μ)
    ``full``:     -pN/T + h0/T ∫_0^T W(t) dt + c(μ)

    The revenue term always divides by the full cycle length.
    """
    if not 0.0 <= alpha < 0.5:
        raise DomainError(f"Trim fraction must lie in [0, 1/2), got {alpha}")
    T = trace.duration
    revenue = trace.policy.p * trace.n_arrivals / T
    if estimator == "trimmed":
        holding = observed_workload_integral(trace, alpha * T, (1.0 - alpha) * T) / ((1.0 - 2.0 * alpha) * T)
    elif estimator == "full":
        holding = workload_integral(trace, 0.0, T) / T
    else:
        raise ConfigError("estimator", f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")
    return -revenue + h0 * holding + float(cost.value(trace.mu))


def fd_gradient(fhat_minus: float, fhat_plus: float, Z, delta: float) -> np.ndarray:
    """H = Z (f̂₊ - f̂₋) / δ."""
    if delta <= 0:
        raise DomainError(f"Perturbation size must be positive, got {delta}")
    return np.asarray(Z, dtype=float) * (fhat_plus - fhat_minus) / delta


def sgd_update(xbar: Policy, H, eta: float, box: FeasibleBox) -> Policy:
    """Projected step Π_box(x̄ - ηH)."""
    return Policy.from_array(box.clip(xbar.as_array() - eta * np.asarray(H, dtype=float)))


def perturbed_policies(xbar: Policy, Z: np.ndarray, delta: float, box: FeasibleBox) -> Tuple[Policy, Policy, float]:
    """
    Clamped pair x̄ ∓ δZ/2 and the half-difference actually applied on the
    active coordinate.
    """
    center = xbar.as_array()
    x_minus = box.clip(center - delta * Z / 2.0)
    x_plus = box.clip(center + delta * Z / 2.0)
    active = int(np.argmax(Z))
    delta_eff = float(x_plus[active] - x_minus[active]) / 2.0
    return Policy.from_array(x_minus), Policy.from_array(x_plus), delta_eff


# ═══════════════════════════════════════════════════════════════════════════════
# THE LEARNING LOOP
# ═══════════════════════════════════════════════════════════════════════════════

IterationCallback = Callable[[IterationRecord], None]


def run_liquar(
    system: QueueSystem,
    schedule: HyperSchedule,
    seed: int,
    initial: Policy = Policy(10.0, 5.0),
    w0: float = 0.0,
    estimator: str = "trimmed",
    on_iteration: Optional[IterationCallback] = None,
) -> RunResult:
    """
    Run L iterations of the learner on a simulated system.

    Randomness comes from streams keyed by (seed, cycle, purpose). Both
    cycles of iteration k draw from the streams of cycle 2k-1: Z_k from its
    DIRECTION stream, and arrivals and workloads from its ARRIVALS and JOBS
    streams. The pair therefore sees the same unit-rate arrival gaps
    (scaled by each policy's rate) and the same job sizes.

    Args:
        system: System to operate (true demand drives the simulation)
        schedule: Hyperparameter sequences
        seed: Root seed
        initial: Starting policy, clamped into the box
        w0: Workload at time 0
        estimator: ``trimmed`` (censored, trimmed) or ``full`` (uncensored)
        on_iteration: Optional callback after each iteration

    Returns:
        RunResult
    """
    if estimator not in ESTIMATORS:
        raise ConfigError("estimator", f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")

    box = system.box
    xbar = Policy.from_array(box.clip(initial.as_array()))
    workload = float(w0)
    arrival_state: Optional[ArrivalState] = None

    records: List[IterationRecord] = []
    cycles: List[CycleSummary] = []

    for k in range(1, schedule.L + 1):
        T_k, delta_k, eta_k = schedule.cycle_length(k), schedule.delta(k), schedule.eta(k)
        crn = iteration_stream(seed, k)
        Z = draw_direction(crn.child(Purpose.DIRECTION))
        x_minus, x_plus, delta_eff = perturbed_policies(xbar, Z, delta_k, box)

        fhats = []
        for l, x in ((2 * k - 1, x_minus), (2 * k, x_plus)):
            process = system.arrival_process(x.p)
            arrival_state = renewal_boundary_reset(arrival_state, process.rate)
            trace = simulate_cycle(workload, x, T_k, process, system.service, crn, state=arrival_state)
            fhat = estimate_performance(trace, schedule.alpha, system.h0, system.cost, estimator)
            cycles.append(CycleSummary(
                k=k, l=l, mu=x.mu, p=x.p, duration=T_k, n_arrivals=trace.n_arrivals,
                w0=trace.w0, w_end=trace.w_end,
                workload_integral=workload_integral(trace, 0.0, T_k), fhat=fhat,
            ))
            fhats.append(fhat)
            workload, arrival_state = trace.w_end, trace.arrival_state

        degenerate = delta_eff <= 0.0
        H = np.zeros(2) if degenerate else fd_gradient(fhats[0], fhats[1], Z, delta_eff)
        record = IterationRecord(
            k=k, xbar=xbar, Z=(float(Z[0]), float(Z[1])), x_minus=x_minus, x_plus=x_plus,
            delta=delta_k, delta_eff=delta_eff, eta=eta_k,
            fhat_minus=fhats[0], fhat_plus=fhats[1], H=(float(H[0]), float(H[1])),
            w_handoff=workload, degenerate=degenerate,
        )
        records.append(record)
        if on_iteration:
            on_iteration(record)

        xbar = sgd_update(xbar, H, eta_k, box)
        logger.debug(f"k={k} xbar=({xbar.mu:.4f}, {xbar.p:.4f}) H=({H[0]:.4g}, {H[1]:.4g})")

    logger.info(f"seed {seed}: finished {schedule.L} iterations at mu={xbar.mu:.4f} p={xbar.p:.4f}")
    manifest = {
        "seed": seed,
        "stream_keys": "(cycle 2k-1, purpose)",
        "purposes": {p.name.lower(): int(p) for p in Purpose},
        "direction_stream": "cycle 2k-1",
        "common_random_numbers": "cycles 2k-1 and 2k share the streams of cycle 2k-1",
    }
    return RunResult(records, cycles, xbar, seed, system.h0, system.cost, manifest)


def replay_cycle(system: QueueSystem, seed: int, summary: CycleSummary) -> CycleTrace:
    """
    Re-simulate one recorded cycle from its iteration's stream.

    Every cycle starts a fresh inter-arrival gap, so the carried workload
    and the iteration's stream determine the path exactly.
    """
    policy = Policy(summary.mu, summary.p)
    return simulate_cycle(
        summary.w0, policy, summary.duration, system.arrival_process(policy.p),
        system.service, iteration_stream(seed, summary.k),
    )
