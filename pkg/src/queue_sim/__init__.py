"""Exact event-driven simulation of the single-server workload process."""

from src.queue_sim.arrivals import (
    ArrivalKind,
    ArrivalProcess,
    ArrivalSpec,
    ArrivalState,
    arrival_epochs,
    renewal_boundary_reset,
)
from src.queue_sim.diagnostics import (
    censoring_error_profile,
    dump_trace_csv,
    long_run_average_workload,
)
from src.queue_sim.simulator import simulate_cycle
from src.queue_sim.trace import (
    CycleTrace,
    Policy,
    build_trace,
    busy_time,
    observed_workload,
    observed_workload_integral,
    work_conservation_gap,
    workload_at,
    workload_integral,
)

__all__ = [
    "ArrivalKind",
    "ArrivalProcess",
    "ArrivalSpec",
    "ArrivalState",
    "arrival_epochs",
    "renewal_boundary_reset",
    "censoring_error_profile",
    "dump_trace_csv",
    "long_run_average_workload",
    "simulate_cycle",
    "CycleTrace",
    "Policy",
    "build_trace",
    "busy_time",
    "observed_workload",
    "observed_workload_integral",
    "work_conservation_gap",
    "workload_at",
    "workload_integral",
]
