"""
Tests for the command-line interface.
"""

import re

import pytest
from click.testing import CliRunner

from src.cli import EXIT_CONFIG, EXIT_FAILURE, cli
from src.harness.oracles import OracleCheck
from src.harness.presets import BASE_BOX, BASE_COST, BASE_DEMAND
from src.liquar.schedule import HyperSchedule
from src.utils.config import ExperimentConfig, PtoSettings, save_config


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def tiny_config_file(tmp_path):
    """A config with six short iterations and a pPTO section."""
    config = ExperimentConfig(
        label="tiny",
        demand=BASE_DEMAND,
        cost=BASE_COST,
        h0=1.0,
        box=BASE_BOX,
        schedule=HyperSchedule(c_T=5.0, L=6),
        pto=PtoSettings(theta=0.15, total_time=5000.0, opt_chunks=2),
    ).validate()
    return save_config(config, tmp_path / "tiny.json")


class TestConfigErrors:
    """Configuration problems exit with code 2."""

    def test_missing_config_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["solve-optimal", "--config", str(tmp_path / "absent.json")])
        assert result.exit_code == EXIT_CONFIG

    def test_invalid_config(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"label": "x"}')
        result = runner.invoke(cli, ["solve-optimal", "--config", str(path)])
        assert result.exit_code == EXIT_CONFIG
        assert "demand" in result.output

    def test_config_or_preset_required(self, runner):
        result = runner.invoke(cli, ["solve-optimal"])
        assert result.exit_code == EXIT_CONFIG

    def test_unknown_preset(self, runner):
        result = runner.invoke(cli, ["solve-optimal", "--preset", "base-9"])
        assert result.exit_code == EXIT_CONFIG

    def test_bad_environment(self, runner, tiny_config_file, monkeypatch):
        monkeypatch.setenv("LIQUAR_JOBS", "many")
        result = runner.invoke(cli, ["replicate", "--config", str(tiny_config_file), "--runs", "1"])
        assert result.exit_code == EXIT_CONFIG

    def test_bad_h0_list(self, runner):
        result = runner.invoke(cli, ["sensitivity", "--h0-list", "1,x"])
        assert result.exit_code == 2


class TestUnexpectedErrors:
    """Failures outside the package error hierarchy still exit cleanly."""

    def test_unexpected_exception_exits_with_failure(self, runner, monkeypatch):
        def broken(*args, **kwargs):
            raise RuntimeError("solver crashed")

        monkeypatch.setattr("src.analytic.optimizer.solve_objective", broken)
        result = runner.invoke(cli, ["solve-optimal", "--preset", "base-6.1"])
        assert result.exit_code == EXIT_FAILURE
        assert "RuntimeError" in result.output
        assert "solver crashed" in result.output
        assert not isinstance(result.exception, RuntimeError)


class TestCommands:
    """Each command on small inputs."""

    def test_version(self, runner):
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "0.1.0" in result.output

    def test_solve_optimal(self, runner):
        result = runner.invoke(cli, ["solve-optimal", "--preset", "base-6.1"])
        assert result.exit_code == 0, result.output
        match = re.search(r"mu\*=([\d.]+) p\*=([\d.]+)", result.output)
        assert match is not None
        assert float(match.group(1)) == pytest.approx(8.18, abs=0.01)
        assert float(match.group(2)) == pytest.approx(3.79, abs=0.01)

    def test_run_liquar(self, runner, tiny_config_file, tmp_path):
        out = tmp_path / "runs"
        result = runner.invoke(cli, [
            "run-liquar", "--config", str(tiny_config_file), "--seed", "1", "--out", str(out), "--no-svg",
        ])
        assert result.exit_code == 0, result.output
        directory = out / "tiny-seed1"
        assert (directory / "cycles.csv").exists()
        assert (directory / "summary.json").exists()

    def test_run_pto(self, runner, tiny_config_file, tmp_path):
        out = tmp_path / "runs"
        result = runner.invoke(cli, [
            "run-pto", "--config", str(tiny_config_file), "--theta", "0.15", "--m", "5",
            "--seed", "1", "--out", str(out), "--no-svg",
        ])
        assert result.exit_code == 0, result.output
        assert (out / "tiny-seed1" / "ledger.csv").exists()

    def test_run_pto_rejects_bad_theta(self, runner, tiny_config_file):
        result = runner.invoke(cli, ["run-pto", "--config", str(tiny_config_file), "--theta", "1.5"])
        assert result.exit_code == EXIT_CONFIG

    def test_replicate(self, runner, tiny_config_file, tmp_path, monkeypatch):
        monkeypatch.delenv("LIQUAR_JOBS", raising=False)
        out = tmp_path / "runs"
        result = runner.invoke(cli, [
            "replicate", "--config", str(tiny_config_file), "--runs", "2", "--seed0", "3",
            "--out", str(out), "--no-svg",
        ])
        assert result.exit_code == 0, result.output
        assert (out / "tiny-rep2-seed03" / "regret.csv").exists()

    def test_sensitivity(self, runner):
        result = runner.invoke(cli, ["sensitivity", "--epsilon", "0.05", "--h0-list", "1,0.05"])
        assert result.exit_code == 0, result.output

    def test_check_assumptions(self, runner):
        result = runner.invoke(cli, ["check-assumptions", "--preset", "base-6.1", "--grid", "60"])
        assert result.exit_code == 0, result.output

    def test_list_presets(self, runner):
        result = runner.invoke(cli, ["list-presets"])
        assert result.exit_code == 0, result.output
        assert "Presets" in result.output

    def test_validate_sim_shows_swapped_readings(self, runner, monkeypatch):
        """The oracle report carries the E2/M/1 objective in both argument orders."""
        passing = [OracleCheck("pk-mean-workload rho=0.5", 1.0, 1.0, 0.02, True)]
        monkeypatch.setattr("src.harness.oracles.simulator_oracles", lambda seed, quick: passing)
        result = runner.invoke(cli, ["validate-sim", "--seed", "0"])
        assert result.exit_code == 0, result.output
        assert "E2/M/1 Readings" in result.output
        assert "mu=3.75, p=7.78" in result.output
        assert "mu=7.78, p=3.75" in result.output
        assert "optimum f" in result.output

    def test_validate_sim_fails_on_failed_check(self, runner, monkeypatch):
        failing = [OracleCheck("work-conservation", 1.0, 0.0, 1e-9, False)]
        monkeypatch.setattr("src.harness.oracles.simulator_oracles", lambda seed, quick: failing)
        result = runner.invoke(cli, ["validate-sim"])
        assert result.exit_code == EXIT_FAILURE
