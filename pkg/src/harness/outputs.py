"""
Output directories for single runs and replications.

    <out>/<label>-seed<S>/            one run
    <out>/<label>-rep<N>-seed0<S>/    one replication
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.analytic.optimizer import OptimalSolution
from src.harness.charts import replication_figure, run_figure, save_figure
from src.harness.regret import RegretReport, loglog_slope
from src.harness.replicate import ReplicationReport
from src.liquar.engine import RunResult, replay_cycle
from src.pto.ppto import PtoResult
from src.queue_sim.diagnostics import dump_trace_csv
from src.utils.config import ExperimentConfig, save_config
from src.utils.console import get_logger
from src.utils.errors import DomainError

logger = get_logger(__name__)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def write_json(path: Path, data: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2) + "\n")
    return path


def run_directory(base: Path, label: str, seed: int) -> Path:
    return Path(base) / f"{label}-seed{seed}"


def replication_directory(base: Path, label: str, n_runs: int, seed0: int) -> Path:
    return Path(base) / f"{label}-rep{n_runs}-seed0{seed0}"


def run_summary(result: Union[RunResult, PtoResult], report: RegretReport, optimum: OptimalSolution) -> Dict[str, Any]:
    """Headline figures of one run."""
    summary: Dict[str, Any] = {
        "seed": result.seed,
        "optimum": optimum.to_dict(),
        "final_policy": {"mu": result.final_policy.mu, "p": result.final_policy.p},
        "final_distance": result.final_policy.distance(optimum.policy),
        "horizon": float(report.times[-1]),
        "final_regret": report.final_regret,
        "final_relative_regret": report.final_relative,
    }
    try:
        summary["fit"] = loglog_slope(report).to_dict()
    except DomainError:
        summary["fit"] = None
    if isinstance(result, PtoResult):
        summary["pto"] = result.summary()
    return summary


def write_run_outputs(
    config: ExperimentConfig,
    result: Union[RunResult, PtoResult],
    report: RegretReport,
    optimum: OptimalSolution,
    base: Path,
    svg: Optional[bool] = None,
) -> Path:
    """
    Write config snapshot, seed manifest, ledgers, regret curve and summary.

    Returns:
        The run directory
    """
    directory = run_directory(base, config.label, result.seed)
    directory.mkdir(parents=True, exist_ok=True)
    save_config(config, directory / "config.json")
    write_json(directory / "seeds.json", result.manifest)

    if isinstance(result, RunResult):
        result.cycles_frame().to_csv(directory / "cycles.csv", index=False)
        result.iterations_frame().to_csv(directory / "iterations.csv", index=False)
        trajectory = result.trajectory()
        if config.output.trace_dump and result.cycles:
            trace = replay_cycle(config.system(), result.seed, result.cycles[-1])
            dump_trace_csv(trace, directory / "trace.csv")
    else:
        result.ledger_frame().to_csv(directory / "ledger.csv", index=False)
        trajectory = None

    report.frame().to_csv(directory / "regret.csv", index=False)
    write_json(directory / "summary.json", run_summary(result, report, optimum))

    if config.output.svg if svg is None else svg:
        save_figure(run_figure(report, trajectory, optimum.policy, title=config.label), directory)
    logger.info(f"Wrote {directory}")
    return directory


def write_replication_outputs(
    config: ExperimentConfig,
    report: ReplicationReport,
    seed0: int,
    base: Path,
    svg: Optional[bool] = None,
) -> Path:
    """Write the averaged regret curve, its summary and optionally the chart."""
    directory = replication_directory(base, config.label, report.n_runs, seed0)
    directory.mkdir(parents=True, exist_ok=True)
    save_config(config, directory / "config.json")
    report.frame().to_csv(directory / "regret.csv", index=False)
    write_json(directory / "summary.json", report.summary())
    if config.output.svg if svg is None else svg:
        save_figure(replication_figure(report, title=config.label), directory)
    logger.info(f"Wrote {directory}")
    return directory
