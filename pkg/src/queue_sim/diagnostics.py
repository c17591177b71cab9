"""
Simulator oracles used by ``validate-sim`` and the test suite.

These run many cycles and compare against closed forms; they are not on
the measurement path of the learning experiments.
"""

from pathlib import Path
from typing import Dict, Iterable, Optional

import numpy as np
import pandas as pd

from src.queue_sim.arrivals import ArrivalProcess, renewal_boundary_reset
from src.queue_sim.simulator import simulate_cycle
from src.queue_sim.trace import (
    CycleTrace,
    Policy,
    observed_workload,
    work_conservation_gap,
    workload_at,
    workload_integral,
)
from src.stochastic.distributions import UnitDist
from src.stochastic.streams import RngStream
from src.utils.console import get_logger

logger = get_logger(__name__)


def long_run_average_workload(
    arrivals: ArrivalProcess,
    mu: float,
    horizon: float,
    service: UnitDist,
    seed: int,
    chunk: float = 1e4,
    reset_at_boundaries: bool = False,
) -> Dict[str, float]:
    """
    Time-average workload over a long horizon, chaining fixed-length cycles.

    Workload and the pending inter-arrival residual are carried across
    chunks, so the result is one continuous path held in memory one chunk
    at a time.

    Returns:
        Dict with ``mean_workload``, ``arrivals``, ``max_conservation_gap``
    """
    root = RngStream(seed)
    policy = Policy(mu, 0.0)
    w, state = 0.0, None
    area, count, worst_gap = 0.0, 0, 0.0
    n_chunks = int(np.ceil(horizon / chunk))

    for i in range(n_chunks):
        length = min(chunk, horizon - i * chunk)
        if reset_at_boundaries:
            state = renewal_boundary_reset(state, arrivals.rate)
        trace = simulate_cycle(w, policy, length, arrivals, service, root.child(i), state=state)
        area += workload_integral(trace, 0.0, trace.duration)
        count += trace.n_arrivals
        worst_gap = max(worst_gap, work_conservation_gap(trace))
        w, state = trace.w_end, trace.arrival_state

    return {
        "mean_workload": area / horizon,
        "arrivals": float(count),
        "max_conservation_gap": worst_gap,
    }


def censoring_error_profile(
    lam: float,
    mu: float,
    duration: float,
    margins: Iterable[float],
    n_traces: int,
    seed: int,
    service: Optional[UnitDist] = None,
) -> Dict[float, float]:
    """
    Mean |Ŵ(t) - W(t)| at t = T - m/μ for each margin m.

    Margins are measured in mean service times. Each trace starts empty and
    all margins are evaluated on the same set of traces.

    Returns:
        Mapping margin → mean absolute censoring error
    """
    service = service or UnitDist.exponential()
    margins = list(margins)
    totals = np.zeros(len(margins))
    root = RngStream(seed)
    process = ArrivalProcess.poisson(lam)
    policy = Policy(mu, 0.0)

    for i in range(n_traces):
        trace = simulate_cycle(0.0, policy, duration, process, service, root.child(i))
        for j, m in enumerate(margins):
            t = max(duration - m / mu, 0.0)
            totals[j] += abs(observed_workload(trace, t) - workload_at(trace, t))

    profile = {m: float(total / n_traces) for m, total in zip(margins, totals)}
    logger.debug(f"censoring error profile: {profile}")
    return profile


def dump_trace_csv(trace: CycleTrace, path: Path | str) -> Path:
    """Write the breakpoints of a trace as (t, W, event) rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(trace.breakpoints(), columns=["t", "W", "event"])
    frame.to_csv(path, index=False)
    return path
