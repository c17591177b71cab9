"""Regret measurement, replication, presets and experiment outputs."""

from src.harness.regret import (
    LogLogFit,
    RegretReport,
    cost_ledger,
    cycle_cost,
    loglog_slope,
    realized_cost,
    regret_curve,
    regret_decomposition,
    regret_from_ledger,
)
from src.harness.replicate import (
    ReplicationOrchestrator,
    ReplicationReport,
    RunOutcome,
    aggregate,
    benchmark_optimum,
    replicate,
    replicate_async,
    run_experiment,
)
from src.harness.presets import find_config, preset, preset_names, single_preset

__all__ = [
    "LogLogFit",
    "RegretReport",
    "cost_ledger",
    "cycle_cost",
    "loglog_slope",
    "realized_cost",
    "regret_curve",
    "regret_decomposition",
    "regret_from_ledger",
    "ReplicationOrchestrator",
    "ReplicationReport",
    "RunOutcome",
    "aggregate",
    "benchmark_optimum",
    "replicate",
    "replicate_async",
    "run_experiment",
    "find_config",
    "preset",
    "preset_names",
    "single_preset",
]
