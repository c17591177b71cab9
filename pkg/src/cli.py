#!/usr/bin/env python3
"""
LiQUAR CLI - learning prices and service capacity in a single-server queue.

Usage:
    python -m src.cli solve-optimal --config configs/base-6.1/base.json
    python -m src.cli run-liquar --preset base-6.1-desk --seed 1
    python -m src.cli run-pto --config configs/pto-light-6.3/pto-light-ppto-theta0.06.json --theta 0.06 --m 5 --seed 1
    python -m src.cli replicate --preset base-6.1-desk --runs 10 --jobs 4
    python -m src.cli sensitivity --epsilon 0.05
    python -m src.cli check-assumptions --config configs/base-6.1/base.json
    python -m src.cli validate-sim --seed 0
"""

import asyncio
import functools
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import click
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from src.utils.config import ExperimentConfig, PtoSettings, load_config, load_settings
from src.utils.console import configure_logging, console
from src.utils.errors import ConfigError, LiquarError

EXIT_FAILURE = 1
EXIT_CONFIG = 2


def handle_errors(command):
    """Map configuration problems to exit code 2 and any other failure to 1."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except FileNotFoundError as e:
            console.print(f"[red]File not found: {e.filename or e}[/red]")
            sys.exit(EXIT_CONFIG)
        except ConfigError as e:
            console.print(f"[red]Invalid configuration[/red] [bold]{e.key}[/bold]: {e.detail}")
            sys.exit(EXIT_CONFIG)
        except LiquarError as e:
            console.print(f"[red]{type(e).__name__}: {e}[/red]")
            sys.exit(EXIT_FAILURE)
        except (click.ClickException, click.exceptions.Exit, click.exceptions.Abort):
            raise
        except Exception as e:
            console.print(f"[red]Error in {command.__name__}: {type(e).__name__}: {e}[/red]")
            sys.exit(EXIT_FAILURE)

    return wrapper


def resolve_config(config_path: Optional[Path], preset_name: Optional[str], label: Optional[str]) -> ExperimentConfig:
    """Load ``--config`` or look up ``--preset`` (and ``--label``)."""
    from src.harness.presets import find_config

    if (config_path is None) == (preset_name is None):
        raise ConfigError("config", "pass exactly one of --config or --preset")
    if config_path is not None:
        return load_config(config_path)
    return find_config(preset_name, label)


def config_options(command):
    command = click.option("--label", default=None, help="Config label within a multi-config preset")(command)
    command = click.option("--preset", "preset_name", default=None, help="Named preset (see list-presets)")(command)
    command = click.option(
        "--config", "-c", "config_path", default=None,
        type=click.Path(dir_okay=False, path_type=Path), help="Experiment JSON file",
    )(command)
    return command


def print_optimum(optimum, title: str = "Optimal Policy"):
    table = Table(title=title)
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right", style="green")
    for key, value in optimum.to_dict().items():
        table.add_row(key, f"{value:.6g}")
    console.print(table)


@click.group()
@click.version_option(version="0.1.0", prog_name="liquar")
@click.option("--log-level", default=None, help="Override LIQUAR_LOG_LEVEL")
def cli(log_level: Optional[str]):
    """LiQUAR - online pricing and capacity sizing for a single-server queue."""
    configure_logging(log_level)


@cli.command("solve-optimal")
@config_options
@click.option("--grid", type=int, default=None, help="Grid points per axis for the initial scan")
@handle_errors
def solve_optimal_cmd(config_path, preset_name, label, grid):
    """Solve for the full-information optimum x* of a config."""
    from src.analytic.optimizer import GRID_POINTS, solve_objective

    config = resolve_config(config_path, preset_name, label)
    optimum = solve_objective(config.system().objective(), config.box, grid or GRID_POINTS)
    console.print(f"mu*={optimum.policy.mu:.4f} p*={optimum.policy.p:.4f}")
    print_optimum(optimum, title=f"Optimum: {config.label}")


@cli.command("run-liquar")
@config_options
@click.option("--seed", "-s", type=int, default=0, help="Root seed")
@click.option("--out", "-o", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Output directory (default LIQUAR_OUTPUT_DIR)")
@click.option("--svg/--no-svg", default=None, help="Write the regret chart")
@handle_errors
def run_liquar_cmd(config_path, preset_name, label, seed, out, svg):
    """Run the learner once and write its ledgers and regret curve."""
    from src.harness.outputs import write_run_outputs
    from src.harness.regret import regret_curve
    from src.harness.replicate import benchmark_optimum
    from src.liquar.engine import run_liquar

    config = resolve_config(config_path, preset_name, label)
    settings = load_settings()
    optimum = benchmark_optimum(config)

    console.print(Panel.fit(
        f"[bold blue]{config.label}[/bold blue]\n\n"
        f"[yellow]Iterations:[/yellow] {config.schedule.L}\n"
        f"[yellow]Horizon:[/yellow] {config.schedule.total_time():.6g}\n"
        f"[yellow]Seed:[/yellow] {seed}",
        title="LiQUAR Run",
    ))

    with Progress(
        TextColumn("[progress.description]{task.description}"), BarColumn(), MofNCompleteColumn(),
        TimeElapsedColumn(), console=console,
    ) as progress:
        task = progress.add_task("iterations", total=config.schedule.L)
        result = run_liquar(
            config.system(), config.schedule, seed, config.initial, estimator=config.estimator,
            on_iteration=lambda record: progress.advance(task),
        )

    report = regret_curve(result, optimum.f_star)
    directory = write_run_outputs(config, result, report, optimum, out or settings.output_dir, svg)

    table = Table(title="Run Summary")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right", style="green")
    table.add_row("final mu", f"{result.final_policy.mu:.4f}")
    table.add_row("final p", f"{result.final_policy.p:.4f}")
    table.add_row("mu*, p*", f"{optimum.policy.mu:.4f}, {optimum.policy.p:.4f}")
    table.add_row("distance to x*", f"{result.final_policy.distance(optimum.policy):.4f}")
    table.add_row("final regret", f"{report.final_regret:.6g}")
    table.add_row("relative regret", f"{report.final_relative:.4%}")
    console.print(table)
    console.print(f"Outputs in [bold]{directory}[/bold]")


@cli.command("run-pto")
@config_options
@click.option("--theta", type=float, default=None, help="Exploration ratio in (0, 1)")
@click.option("--m", "m", type=int, default=None, help="Number of exploration prices")
@click.option("--family", default=None, help="Demand family to fit")
@click.option("--seed", "-s", type=int, default=0, help="Root seed")
@click.option("--out", "-o", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--svg/--no-svg", default=None)
@handle_errors
def run_pto_cmd(config_path, preset_name, label, theta, m, family, seed, out, svg):
    """Run the predict-then-optimize baseline once."""
    from src.harness.outputs import write_run_outputs
    from src.harness.regret import regret_curve
    from src.harness.replicate import benchmark_optimum
    from src.pto.ppto import run_ppto

    config = resolve_config(config_path, preset_name, label)
    settings = load_settings()
    pto = config.pto or PtoSettings()
    overrides = {k: v for k, v in {"theta": theta, "m": m, "family": family}.items() if v is not None}
    pto = PtoSettings.from_dict({**pto.to_dict(), **overrides})
    config = replace(config, method="ppto", pto=pto).validate()

    optimum = benchmark_optimum(config)
    result = run_ppto(
        config.system(), pto.family, pto.theta, pto.m, config.horizon(), seed,
        explore_mu=pto.explore_mu, opt_chunks=pto.opt_chunks,
    )
    report = regret_curve(result, optimum.f_star)
    directory = write_run_outputs(config, result, report, optimum, out or settings.output_dir, svg)

    table = Table(title=f"pPTO theta={pto.theta:g}, m={pto.m}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right", style="green")
    for key, value in result.fitted_model.named_params.items():
        table.add_row(f"fitted {key}", f"{value:.6g}")
    table.add_row("plan mu, p", f"{result.x_hat.mu:.4f}, {result.x_hat.p:.4f}")
    table.add_row("mu*, p*", f"{optimum.policy.mu:.4f}, {optimum.policy.p:.4f}")
    table.add_row("prediction cost", f"{result.prediction_cost:.6g}")
    table.add_row("optimization cost", f"{result.optimization_cost:.6g}")
    table.add_row("final regret", f"{report.final_regret:.6g}")
    table.add_row("relative regret", f"{report.final_relative:.4%}")
    console.print(table)
    console.print(f"Outputs in [bold]{directory}[/bold]")


@cli.command()
@config_options
@click.option("--runs", "-n", type=int, default=None, help="Replications (default: the config's)")
@click.option("--seed0", type=int, default=0, help="First seed")
@click.option("--jobs", "-j", type=int, default=None, help="Worker processes (default LIQUAR_JOBS)")
@click.option("--out", "-o", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--svg/--no-svg", default=None)
@handle_errors
def replicate(config_path, preset_name, label, runs, seed0, jobs, out, svg):
    """Average regret over seeded runs and fit the log-log slope."""
    from src.harness.outputs import write_replication_outputs
    from src.harness.replicate import ReplicationOrchestrator

    config = resolve_config(config_path, preset_name, label)
    settings = load_settings()
    n_runs = runs or config.replications
    jobs = jobs or settings.jobs

    with Progress(
        TextColumn("[progress.description]{task.description}"), BarColumn(), MofNCompleteColumn(),
        TimeElapsedColumn(), console=console,
    ) as progress:
        task = progress.add_task(config.label, total=n_runs)

        async def on_progress(seed: int, finished: int, total: int):
            progress.update(task, completed=finished, description=f"{config.label} (seed {seed} done)")

        orchestrator = ReplicationOrchestrator(jobs, on_progress=on_progress, grid_points=settings.grid_points)
        report = asyncio.run(orchestrator.run(config, n_runs, seed0))

    directory = write_replication_outputs(config, report, seed0, out or settings.output_dir, svg)

    table = Table(title=f"{config.label}: {n_runs} runs from seed {seed0}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right", style="green")
    table.add_row("mu*, p*", f"{report.optimum.policy.mu:.4f}, {report.optimum.policy.p:.4f}")
    if report.fit:
        table.add_row("slope", f"{report.fit.slope:.4f}")
        table.add_row("intercept", f"{report.fit.intercept:.4f}")
    else:
        table.add_row("slope", "n/a")
    table.add_row("final relative regret", f"{report.final_relative_regret:.4%}")
    table.add_row("median final distance", f"{report.median_final_distance:.4f}")
    console.print(table)
    console.print(f"Outputs in [bold]{directory}[/bold]")


def parse_float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


@cli.command()
@click.option("--epsilon", "-e", type=float, default=0.05, help="Demand deflation factor")
@click.option("--h0-list", callback=parse_float_list, default=None,
              help="Comma-separated holding costs (default 1,0.4,0.15,0.05,0.02,0.001)")
@click.option("--scv", type=float, default=1.0, help="Service SCV")
@click.option("--config", "-c", "config_path", default=None, type=click.Path(dir_okay=False, path_type=Path),
              help="Take demand, cost and box from a config")
@handle_errors
def sensitivity(epsilon, h0_list, scv, config_path):
    """Profit loss when planning with ε-deflated demand."""
    from src.harness.presets import BASE_COST, BASE_DEMAND, SENSITIVITY_BOX
    from src.pto.sensitivity import DEFAULT_H0_LIST, sensitivity_misspecification

    demand, cost, box = BASE_DEMAND, BASE_COST, SENSITIVITY_BOX
    if config_path is not None:
        config = load_config(config_path)
        demand, cost, box, scv = config.demand, config.cost, config.box, config.system().scv

    rows = sensitivity_misspecification(demand, cost, scv, box, epsilon, h0_list or DEFAULT_H0_LIST)

    table = Table(title=f"Misspecification sensitivity, epsilon={epsilon:g}")
    table.add_column("h0", justify="right", style="cyan")
    table.add_column("rho*", justify="right")
    table.add_column("mu*, p*", justify="right")
    table.add_column("mu^, p^", justify="right")
    table.add_column("true rho^", justify="right")
    table.add_column("profit loss", justify="right", style="red")
    table.add_column("workload error", justify="right", style="yellow")
    for row in rows:
        loss = "inf (unstable)" if row.unstable else f"{row.relative_loss:.4%}"
        table.add_row(
            f"{row.h0:g}", f"{row.rho_star:.4f}", f"{row.mu_star:.3f}, {row.p_star:.3f}",
            f"{row.mu_hat:.3f}, {row.p_hat:.3f}",
            f"{row.rho_hat_true:.4f}", loss, f"{row.workload_error:.4%}",
        )
    console.print(table)


@cli.command("check-assumptions")
@config_options
@click.option("--grid", type=int, default=None, help="Grid points per axis (default LIQUAR_GRID_POINTS)")
@handle_errors
def check_assumptions_cmd(config_path, preset_name, label, grid):
    """Check the demand-curvature condition and convexity of the objective."""
    from src.analytic.convexity import objective_convexity_report
    from src.demand.assumptions import check_assumption1a

    config = resolve_config(config_path, preset_name, label)
    grid = grid or load_settings().grid_points
    system = config.system()

    table = Table(title=f"Assumption checks: {config.label}")
    table.add_column("Check", style="cyan")
    table.add_column("Result")
    table.add_column("Details", style="dim")

    try:
        assumption = check_assumption1a(config.demand, config.box, config.h0, system.scv, grid)
        margins = ", ".join(f"{k}={v:.4g}" for k, v in assumption.margins.items())
        verdict = "[green]holds[/green]" if assumption.holds else "[red]fails[/red]"
        table.add_row("demand curvature", verdict,
                      f"{margins}; worst at mu={assumption.worst_point[0]:.3f}, p={assumption.worst_point[1]:.3f}")
    except LiquarError as e:
        table.add_row("demand curvature", "[yellow]not checked[/yellow]", str(e).splitlines()[0])

    report = objective_convexity_report(system.objective(), config.box, grid)
    verdict = "[green]convex[/green]" if report.convex else "[red]not convex[/red]"
    table.add_row(
        "objective convexity", verdict,
        f"min det={report.min_det:.4g}, min f_pp={report.min_fpp:.4g}, "
        f"nonconvex share={report.nonconvex_fraction:.2%}",
    )
    table.add_row("strong-convexity constant", f"{report.k0:.4g}",
                  f"about x*=({report.x_star[0]:.4f}, {report.x_star[1]:.4f})")
    console.print(table)


@cli.command("validate-sim")
@click.option("--seed", "-s", type=int, default=0, help="Root seed")
@click.option("--full", is_flag=True, help="Base horizon 10⁷ and 10⁴ censoring traces")
@handle_errors
def validate_sim(seed, full):
    """Run the simulator oracle suite and report pass/fail."""
    from src.harness.oracles import e2m1_readings, simulator_oracles

    with console.status("[bold green]Simulating..."):
        checks = simulator_oracles(seed, quick=not full)

    table = Table(title="Simulator Oracles")
    table.add_column("Check", style="cyan")
    table.add_column("Observed", justify="right")
    table.add_column("Expected", justify="right")
    table.add_column("Tolerance", justify="right", style="dim")
    table.add_column("Result")
    for check in checks:
        table.add_row(
            check.name, f"{check.observed:.6g}", f"{check.expected:.6g}", f"{check.tolerance:g}",
            "[green]PASS[/green]" if check.passed else "[red]FAIL[/red]",
        )
    console.print(table)

    readings = Table(title="E2/M/1 Readings")
    readings.add_column("Point", style="cyan")
    readings.add_column("Value", justify="right")
    for point, value in e2m1_readings().items():
        readings.add_row(point, f"{value:.6g}")
    console.print(readings)
    if not all(check.passed for check in checks):
        sys.exit(EXIT_FAILURE)


@cli.command("list-presets")
def list_presets():
    """List the named presets and the configs they hold."""
    from src.harness.presets import preset, preset_names

    table = Table(title="Presets")
    table.add_column("Name", style="cyan")
    table.add_column("Configs")
    table.add_column("L", justify="right")
    table.add_column("Runs", justify="right")
    for name in preset_names():
        configs = preset(name)
        labels = ", ".join(c.label for c in configs)
        iterations = sorted({c.schedule.L for c in configs})
        table.add_row(name, labels, "/".join(map(str, iterations)), str(configs[0].replications))
    console.print(table)


if __name__ == "__main__":
    cli()
