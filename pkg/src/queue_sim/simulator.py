"""Event-driven simulation of one operating cycle."""

from typing import Optional

from src.queue_sim.arrivals import ArrivalProcess, ArrivalState, arrival_epochs
from src.queue_sim.trace import CycleTrace, Policy, build_trace
from src.stochastic.distributions import UnitDist
from src.stochastic.streams import Purpose, RngStream


def simulate_cycle(
    w0: float,
    policy: Policy,
    duration: float,
    arrivals: ArrivalProcess,
    service: UnitDist,
    rng: RngStream,
    state: Optional[ArrivalState] = None,
) -> CycleTrace:
    """
    Simulate the workload path of one cycle exactly.

    Arrival epochs and individual workloads come from two child streams of
    ``rng`` so that changing one does not shift the other.

    Args:
        w0: Workload carried in from the previous cycle
        policy: (mu, p) in force for the whole cycle
        duration: Cycle length T
        arrivals: Arrival process at the rate induced by ``policy.p``
        service: Unit-mean law of individual workloads
        rng: Stream for this cycle
        state: Pending residual gap carried from the previous cycle; None
            starts a fresh gap at time 0

    Returns:
        CycleTrace; its ``arrival_state`` continues the process past T
    """
    start = state if state is not None else ArrivalState(arrivals)
    if start.process != arrivals:
        start = ArrivalState(arrivals, start.residual)

    epochs, end_state = arrival_epochs(start, duration, rng.child(Purpose.ARRIVALS))
    jobs = service.draw(rng.child(Purpose.JOBS), len(epochs))
    return build_trace(w0, policy, duration, epochs, jobs, arrival_state=end_state)
