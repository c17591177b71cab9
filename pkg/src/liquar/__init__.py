"""The online learner: paired perturbation cycles and projected SGD."""

from src.liquar.engine import (
    CycleSummary,
    IterationRecord,
    RunResult,
    draw_direction,
    estimate_performance,
    fd_gradient,
    iteration_stream,
    perturbed_policies,
    replay_cycle,
    run_liquar,
    sgd_update,
)
from src.liquar.schedule import HyperSchedule

__all__ = [
    "CycleSummary",
    "IterationRecord",
    "RunResult",
    "draw_direction",
    "estimate_performance",
    "fd_gradient",
    "iteration_stream",
    "perturbed_policies",
    "replay_cycle",
    "run_liquar",
    "sgd_update",
    "HyperSchedule",
]
