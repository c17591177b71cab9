"""
Replication orchestrator.

Runs one experiment under n consecutive seeds, in worker processes when
``jobs`` > 1, and reduces the regret curves to a pointwise mean with a
central 80% band on a common time grid. Outcomes are gathered in seed
order, so the report does not depend on which worker finishes first.
"""

import asyncio
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Awaitable, Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.analytic.optimizer import GRID_POINTS, OptimalSolution, solve_objective
from src.harness.regret import LogLogFit, RegretReport, loglog_slope, regret_curve
from src.liquar.engine import RunResult, run_liquar
from src.pto.ppto import PtoResult, run_ppto
from src.utils.config import ExperimentConfig
from src.utils.console import get_logger
from src.utils.errors import DomainError, ReplicationError

logger = get_logger(__name__)

BAND_PERCENTILES = (10.0, 90.0)
TIME_GRID_POINTS = 200

# Type alias for progress callback: (seed, finished, total)
ProgressCallback = Callable[[int, int, int], Awaitable[None]]


@dataclass
class RunOutcome:
    """One seeded run with its regret curve."""
    seed: int
    result: Union[RunResult, PtoResult]
    regret: RegretReport
    final_distance: float


@dataclass
class ReplicationReport:
    """
    Averaged regret over seeded runs.

    Attributes:
        times: Common time grid, starting at 0
        cumulative: Pointwise mean regret on the grid
        band_lo: 10th percentile of regret on the grid
        band_hi: 90th percentile of regret on the grid
        seeds: Seeds in run order
        optimum: Benchmark x* and f*
        fit: Log-log fit of the mean curve (None if it has too few positive points)
        final_relative_regret: Mean regret at the end over P(x*)·t
        median_final_distance: Median of ‖x_final − x*‖ across runs
        outcomes: The individual runs
    """
    times: np.ndarray
    cumulative: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    seeds: List[int]
    optimum: OptimalSolution
    fit: Optional[LogLogFit]
    final_relative_regret: float
    median_final_distance: float
    outcomes: List[RunOutcome] = field(default_factory=list, repr=False)

    @property
    def n_runs(self) -> int:
        return len(self.seeds)

    def mean_trajectory(self) -> Optional[np.ndarray]:
        """Mean (μ, p) path across LiQUAR runs; None for pPTO."""
        paths = [o.result.trajectory() for o in self.outcomes if isinstance(o.result, RunResult)]
        if not paths:
            return None
        return np.mean(np.stack(paths), axis=0)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "time": self.times,
            "mean_regret": self.cumulative,
            "band_lo": self.band_lo,
            "band_hi": self.band_hi,
        })

    def summary(self) -> Dict[str, Any]:
        return {
            "runs": self.n_runs,
            "seeds": self.seeds,
            "optimum": self.optimum.to_dict(),
            "slope": self.fit.slope if self.fit else None,
            "intercept": self.fit.intercept if self.fit else None,
            "fit": self.fit.to_dict() if self.fit else None,
            "final_relative_regret": self.final_relative_regret,
            "median_final_distance": self.median_final_distance,
        }


# ═══════════════════════════════════════════════════════════════════════════════
# SINGLE RUN (executed in worker processes)
# ═══════════════════════════════════════════════════════════════════════════════

def benchmark_optimum(config: ExperimentConfig, grid: int = GRID_POINTS) -> OptimalSolution:
    """x* of the ground-truth objective of ``config``."""
    return solve_objective(config.system().objective(), config.box, grid)


def run_experiment(config: ExperimentConfig, seed: int, optimum: OptimalSolution) -> RunOutcome:
    """
    Run one seeded experiment and measure its regret against ``optimum``.

    Module-level so it can be pickled into a process pool.
    """
    system = config.system()
    if config.method == "ppto":
        pto = config.pto
        result = run_ppto(
            system, pto.family, pto.theta, pto.m, config.horizon(), seed,
            explore_mu=pto.explore_mu, opt_chunks=pto.opt_chunks,
        )
    else:
        result = run_liquar(system, config.schedule, seed, config.initial, estimator=config.estimator)
    report = regret_curve(result, optimum.f_star)
    return RunOutcome(seed, result, report, result.final_policy.distance(optimum.policy))


# ═══════════════════════════════════════════════════════════════════════════════
# AGGREGATION
# ═══════════════════════════════════════════════════════════════════════════════

def aggregate(
    outcomes: List[RunOutcome],
    optimum: OptimalSolution,
    grid_points: int = TIME_GRID_POINTS,
    fit_fraction: float = 0.8,
) -> ReplicationReport:
    """
    Reduce seeded runs to a mean curve and band.

    Each curve is prefixed with R(0) = 0 and linearly interpolated onto
    ``grid_points`` equally spaced times up to the shortest run's horizon.
    """
    if not outcomes:
        raise DomainError("Nothing to aggregate: no runs")
    t_end = min(float(o.regret.times[-1]) for o in outcomes)
    grid = np.linspace(0.0, t_end, grid_points)
    curves = np.vstack([
        np.interp(grid, np.concatenate([[0.0], o.regret.times]), np.concatenate([[0.0], o.regret.cumulative]))
        for o in outcomes
    ])
    mean = curves.mean(axis=0)
    band_lo, band_hi = np.percentile(curves, BAND_PERCENTILES, axis=0)

    report = ReplicationReport(
        times=grid,
        cumulative=mean,
        band_lo=band_lo,
        band_hi=band_hi,
        seeds=[o.seed for o in outcomes],
        optimum=optimum,
        fit=None,
        final_relative_regret=float(mean[-1] / (optimum.profit * t_end)),
        median_final_distance=float(np.median([o.final_distance for o in outcomes])),
        outcomes=list(outcomes),
    )
    try:
        report.fit = loglog_slope(report, fit_fraction)
    except DomainError as e:
        logger.warning(f"No log-log fit for the mean regret curve: {e}")
    return report


# ═══════════════════════════════════════════════════════════════════════════════
# ORCHESTRATOR
# ═══════════════════════════════════════════════════════════════════════════════

class ReplicationOrchestrator:
    """Dispatches seeded runs and aggregates them."""

    def __init__(
        self,
        jobs: int = 1,
        on_progress: Optional[ProgressCallback] = None,
        grid_points: int = TIME_GRID_POINTS,
    ):
        """
        Initialize the orchestrator.

        Args:
            jobs: Worker processes; 1 runs every seed in-process
            on_progress: Optional async callback for progress updates
            grid_points: Size of the common time grid
        """
        if jobs < 1:
            raise DomainError(f"jobs must be at least 1, got {jobs}")
        self.jobs = jobs
        self.on_progress = on_progress
        self.grid_points = grid_points
        self._finished = 0

    async def _emit_progress(self, seed: int, total: int):
        self._finished += 1
        if self.on_progress:
            await self.on_progress(seed, self._finished, total)

    async def _track(self, seed: int, pending: Awaitable[RunOutcome], total: int) -> RunOutcome:
        try:
            outcome = await pending
        except Exception as e:
            raise ReplicationError(seed, e) from e
        await self._emit_progress(seed, total)
        return outcome

    async def run(
        self,
        config: ExperimentConfig,
        n_runs: int,
        seed0: int = 0,
        optimum: Optional[OptimalSolution] = None,
    ) -> ReplicationReport:
        """
        Run seeds ``seed0 .. seed0 + n_runs - 1`` and aggregate.

        Args:
            config: Experiment to replicate
            n_runs: Number of runs
            seed0: First seed
            optimum: Benchmark to measure regret against (solved from the
                config when omitted)

        Returns:
            ReplicationReport

        Raises:
            ReplicationError: If any run fails; carries its seed
        """
        if n_runs < 1:
            raise DomainError(f"n_runs must be at least 1, got {n_runs}")
        if optimum is None:
            optimum = await asyncio.to_thread(benchmark_optimum, config)
        seeds = [seed0 + i for i in range(n_runs)]
        self._finished = 0
        logger.info(f"{config.label}: {n_runs} runs from seed {seed0} on {self.jobs} worker(s)")

        if self.jobs == 1:
            outcomes = []
            for seed in seeds:
                pending = asyncio.to_thread(run_experiment, config, seed, optimum)
                outcomes.append(await self._track(seed, pending, n_runs))
        else:
            loop = asyncio.get_running_loop()
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                tasks = [
                    self._track(seed, loop.run_in_executor(pool, run_experiment, config, seed, optimum), n_runs)
                    for seed in seeds
                ]
                outcomes = await asyncio.gather(*tasks)

        return aggregate(list(outcomes), optimum, self.grid_points)


async def replicate_async(
    config: ExperimentConfig,
    n_runs: int,
    seed0: int = 0,
    jobs: int = 1,
    on_progress: Optional[ProgressCallback] = None,
    optimum: Optional[OptimalSolution] = None,
) -> ReplicationReport:
    """Convenience coroutine around ReplicationOrchestrator."""
    orchestrator = ReplicationOrchestrator(jobs, on_progress=on_progress)
    return await orchestrator.run(config, n_runs, seed0, optimum)


# Synchronous wrapper for non-async contexts
def replicate(
    config: ExperimentConfig,
    n_runs: int,
    seed0: int = 0,
    jobs: int = 1,
    optimum: Optional[OptimalSolution] = None,
) -> ReplicationReport:
    """Synchronous wrapper for replication."""
    return asyncio.run(replicate_async(config, n_runs, seed0, jobs, optimum=optimum))
