"""
Unit tests for regret measurement, replication, presets, outputs and the
simulator oracles.
"""

import functools
import importlib
import json
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
import pandas as pd
import plotly.graph_objects as go
import pytest

from src.analytic import objective_convexity_report, solve_optimal
from src.demand.models import StaffingCost
from src.harness import (
    ReplicationOrchestrator,
    aggregate,
    benchmark_optimum,
    cycle_cost,
    find_config,
    loglog_slope,
    preset,
    preset_names,
    regret_curve,
    regret_decomposition,
    regret_from_ledger,
    replicate,
    replicate_async,
    run_experiment,
    single_preset,
)
from src.harness.charts import regret_figure, replication_figure, save_figure
from src.harness.oracles import e2m1_readings, poisson_dispersion_pvalue, simulator_oracles
from src.harness.outputs import write_replication_outputs, write_run_outputs
from src.harness.presets import BASE_BOX, BASE_COST, BASE_DEMAND, HEAVY_BOX
from src.liquar import HyperSchedule, run_liquar
from src.pto import run_ppto
from src.queue_sim import ArrivalSpec, Policy, build_trace, simulate_cycle
from src.stochastic.distributions import UnitDist
from src.stochastic.streams import RngStream
from src.utils.config import ExperimentConfig, OutputSettings, PtoSettings
from src.utils.errors import ConfigError, DomainError, ReplicationError

replicate_module = importlib.import_module("src.harness.replicate")


def tiny_config(**overrides) -> ExperimentConfig:
    """A base-model experiment that finishes in well under a second."""
    fields = {
        "label": "tiny",
        "demand": BASE_DEMAND,
        "cost": BASE_COST,
        "h0": 1.0,
        "box": BASE_BOX,
        "schedule": HyperSchedule(c_T=5.0, L=6),
    }
    fields.update(overrides)
    return ExperimentConfig(**fields).validate()


@pytest.fixture(scope="module")
def base_optimum():
    return solve_optimal(BASE_DEMAND, BASE_COST, 1.0, 1.0, BASE_BOX)


class TestCycleCost:
    """Tests for the realized cost of a cycle."""

    def test_empty_cycle(self):
        """No arrivals and no backlog cost c(μ)·T."""
        trace = build_trace(0.0, Policy(2.0, 1.0), 5.0, [], [])
        assert cycle_cost(trace, 1.0, BASE_COST) == pytest.approx(10.0)

    def test_hand_computed(self):
        """Area 0.5, one sale at price 1, no staffing cost: 0.5 - 1."""
        trace = build_trace(1.0, Policy(2.0, 1.0), 2.0, [1.0], [1.0])
        assert cycle_cost(trace, 1.0, StaffingCost.linear(0.0)) == pytest.approx(-0.5)

    def test_long_cycle_matches_objective(self):
        """Cost per unit time of a long M/M/1 cycle is within 2% of f."""
        policy = Policy(8.18, 3.79)
        rate = float(BASE_DEMAND.rate(policy.p))
        trace = simulate_cycle(0.0, policy, 1e5, ArrivalSpec.poisson().at_rate(rate), UnitDist.exponential(), RngStream(5))
        f = -11.29
        assert cycle_cost(trace, 1.0, BASE_COST) / 1e5 == pytest.approx(f, rel=0.02)


class TestRegret:
    """Tests for cumulative regret curves."""

    def test_optimal_ledger_has_zero_regret(self):
        durations = np.array([2.0, 3.0, 4.0])
        report = regret_from_ledger(durations, durations * -11.0, -11.0)
        np.testing.assert_allclose(report.cumulative, 0.0, atol=1e-12)
        np.testing.assert_allclose(report.times, [2.0, 5.0, 9.0])

    def test_additivity(self):
        """Regret of a concatenated ledger continues the first one's curve."""
        d1, c1 = np.array([1.0, 2.0]), np.array([3.0, -1.0])
        d2, c2 = np.array([4.0, 1.5]), np.array([0.5, 2.0])
        whole = regret_from_ledger(np.concatenate([d1, d2]), np.concatenate([c1, c2]), -0.5)
        first = regret_from_ledger(d1, c1, -0.5)
        second = regret_from_ledger(d2, c2, -0.5)
        expected = np.concatenate([first.cumulative, first.final_regret + second.cumulative])
        np.testing.assert_allclose(whole.cumulative, expected, rtol=1e-14)

    def test_wrong_baseline_shifts_linearly(self, base_system, short_schedule, base_optimum):
        """Using f_wrong adds (f_true - f_wrong)·T(L)."""
        run = run_liquar(base_system, short_schedule, seed=1)
        right = regret_curve(run, base_optimum.f_star)
        wrong = regret_curve(run, base_optimum.f_star + 0.3)
        np.testing.assert_allclose(wrong.cumulative - right.cumulative, -0.3 * right.times, rtol=1e-9)

    def test_time_axis_matches_schedule(self, base_system, short_schedule, base_optimum):
        run = run_liquar(base_system, short_schedule, seed=2)
        report = regret_curve(run, base_optimum.f_star)
        assert len(report.times) == 2 * short_schedule.L
        assert report.times[-1] == pytest.approx(short_schedule.total_time())
        assert report.seeds == (2,)

    def test_relative_regret(self):
        report = regret_from_ledger([10.0], [-5.0], -10.0)
        assert report.final_regret == pytest.approx(5.0)
        assert report.final_relative == pytest.approx(5.0 / (10.0 * 10.0))
        assert list(report.frame().columns) == ["time", "cycle_cost", "cumulative_regret", "relative_regret"]

    def test_pto_ledger(self, base_system, base_optimum):
        result = run_ppto(base_system, "logit", 0.15, 5, 2000.0, seed=0, opt_chunks=3, noise_free=True)
        report = regret_curve(result, base_optimum.f_star)
        assert len(report.times) == 8
        assert report.times[-1] == pytest.approx(2000.0)

    def test_decomposition_sums_to_total(self, base_system, short_schedule, base_optimum):
        run = run_liquar(base_system, short_schedule, seed=3)
        frame = regret_decomposition(run, base_system.objective(), base_optimum.f_star)
        parts = frame["suboptimality"] + frame["finite_difference"] + frame["nonstationarity"]
        np.testing.assert_allclose(parts, frame["total"], rtol=1e-9, atol=1e-9)
        assert frame["total"].sum() == pytest.approx(regret_curve(run, base_optimum.f_star).final_regret)

    def test_invalid_ledger(self):
        with pytest.raises(DomainError):
            regret_from_ledger([], [], 0.0)
        with pytest.raises(DomainError):
            regret_from_ledger([1.0, 2.0], [1.0], 0.0)


class TestLogLogSlope:
    """Tests for the power-law fit."""

    def test_square_root_curve(self):
        t = np.linspace(1.0, 1e4, 500)
        fit = loglog_slope(SimpleNamespace(times=t, cumulative=np.sqrt(t)))
        assert fit.slope == pytest.approx(0.5, abs=1e-6)
        assert fit.n_excluded == 0

    def test_linear_curve(self):
        t = np.linspace(1.0, 1e4, 500)
        fit = loglog_slope(SimpleNamespace(times=t, cumulative=0.01 * t))
        assert fit.slope == pytest.approx(1.0, abs=1e-9)
        assert fit.intercept == pytest.approx(np.log(0.01), abs=1e-9)

    def test_nonpositive_points_excluded(self):
        t = np.linspace(1.0, 100.0, 100)
        r = np.sqrt(t)
        r[-5:-2] = -1.0
        fit = loglog_slope(SimpleNamespace(times=t, cumulative=r))
        assert fit.n_excluded == 3
        assert fit.slope == pytest.approx(0.5, abs=1e-6)

    def test_fit_range(self):
        """Only the last fraction of log-time is used."""
        t = np.array([1.0, 10.0, 100.0, 1000.0])
        fit = loglog_slope(SimpleNamespace(times=t, cumulative=t), fit_fraction=0.5)
        assert fit.n_points == 2
        assert fit.t_range == (100.0, 1000.0)

    def test_errors(self):
        with pytest.raises(DomainError):
            loglog_slope(SimpleNamespace(times=[1.0, 2.0], cumulative=[1.0, 2.0]), fit_fraction=0.0)
        with pytest.raises(DomainError):
            loglog_slope(SimpleNamespace(times=[1.0, 2.0, 3.0], cumulative=[-1.0, -1.0, 1.0]))


class TestPresets:
    """Tests for the named experiment presets."""

    def test_base(self):
        config = single_preset("base-6.1")
        schedule = config.schedule
        assert (schedule.c_eta, schedule.c_T, schedule.c_delta, schedule.delta_cap, schedule.alpha, schedule.L) == (
            4.0, 200.0, 0.5, 0.1, 0.1, 1000,
        )
        assert config.initial == Policy(10.0, 5.0)
        assert config.box == BASE_BOX
        assert config.replications == 100

    def test_step_sweep(self):
        configs = preset("step-sweep-6.2.1")
        assert [c.schedule.c_eta for c in configs] == pytest.approx([2.4, 4.0, 4.8])
        assert [c.schedule.c_delta for c in configs] == pytest.approx([0.3, 0.5, 0.6])

    def test_cycle_sweep(self):
        configs = {c.schedule.c_T: c for c in preset("cycle-sweep-6.2.2")}
        assert configs[40.0].schedule.L == 3344
        assert configs[200.0].schedule.L == 1000

    def test_pto_family(self):
        """One learner and five baselines sharing its horizon."""
        configs = preset("pto-light-6.3")
        learner, baselines = configs[0], configs[1:]
        assert learner.method == "liquar" and learner.initial == Policy(10.0, 7.0)
        assert [c.pto.theta for c in baselines] == [0.003, 0.009, 0.015, 0.06, 0.15]
        assert all(c.method == "ppto" and c.horizon() == learner.horizon() for c in baselines)

    def test_heavy_pto_box(self):
        learner = preset("pto-heavy-6.3")[0]
        assert learner.h0 == 0.001
        assert learner.box == HEAVY_BOX
        assert learner.enforce_stability

    @pytest.mark.parametrize("config", [
        c for c in preset("pto-heavy-6.3")[:1] + preset("robustness-C") if c.h0 < 1.0
    ], ids=lambda c: c.label)
    def test_near_critical_boxes_are_stable_and_hold_optimum(self, config):
        """Every corner is stable and x* lies strictly inside the box."""
        assert config.box.is_stable(config.demand)
        optimum = benchmark_optimum(config, grid=120)
        x_star, box = optimum.policy, config.box
        assert box.mu_lo < x_star.mu < box.mu_hi
        assert box.p_lo < x_star.p < box.p_hi
        assert x_star.distance(Policy(box.mu_lo, box.p_lo)) < 0.05

    def test_desk_step_constant(self):
        """Desk schedules take η_k = 1/k; full scale keeps 4/k."""
        assert single_preset("base-6.1-desk").schedule.eta(1) == 1.0
        assert single_preset("base-6.1").schedule.eta(1) == 4.0
        assert [c.schedule.c_eta for c in preset("step-sweep-6.2.1-desk")] == pytest.approx([0.6, 1.0, 1.2])

    def test_e2m1(self):
        config = single_preset("e2m1-6.4")
        assert config.arrivals == ArrivalSpec.renewal(UnitDist.erlang(2))

    def test_robustness_grid(self):
        configs = preset("robustness-C")
        assert len(configs) == 9
        assert {(c.h0, round(c.service.scv(), 6)) for c in configs} == {
            (h0, scv) for h0 in (0.001, 0.02, 1.0) for scv in (0.5, 1.0, 5.0)
        }

    def test_desk_variants(self):
        config = single_preset("base-6.1-desk")
        assert config.label == "base-desk"
        assert config.schedule.L == 300
        assert config.replications == 10
        assert len(preset_names()) == 14

    def test_unknown_preset_lists_alternatives(self):
        with pytest.raises(ConfigError) as exc:
            preset("base-9")
        assert exc.value.key == "preset"
        assert "base-6.1" in str(exc.value)

    def test_selection_by_label(self):
        with pytest.raises(ConfigError):
            single_preset("robustness-C")
        config = find_config("robustness-C", "robustness-h01-scv5")
        assert config.h0 == 1.0
        with pytest.raises(ConfigError):
            find_config("robustness-C", "nope")


class TestReplicate:
    """Tests for replication and aggregation."""

    def test_single_run_equals_mean(self, base_optimum):
        config = tiny_config()
        report = replicate(config, 1, seed0=4, optimum=base_optimum)
        outcome = report.outcomes[0]
        assert report.seeds == [4]
        assert report.cumulative[-1] == pytest.approx(outcome.regret.final_regret)
        np.testing.assert_allclose(report.band_lo, report.cumulative)
        np.testing.assert_allclose(report.band_hi, report.cumulative)
        assert report.times[0] == 0.0 and report.cumulative[0] == 0.0

    def test_deterministic(self, base_optimum):
        config = tiny_config()
        a = replicate(config, 3, seed0=0, optimum=base_optimum)
        b = replicate(config, 3, seed0=0, optimum=base_optimum)
        np.testing.assert_array_equal(a.cumulative, b.cumulative)
        np.testing.assert_array_equal(a.band_lo, b.band_lo)
        assert a.summary() == b.summary()

    def test_worker_processes_match_in_process(self, base_optimum):
        """Aggregation does not depend on how runs are dispatched."""
        config = tiny_config()
        serial = replicate(config, 4, seed0=10, jobs=1, optimum=base_optimum)
        parallel = replicate(config, 4, seed0=10, jobs=2, optimum=base_optimum)
        assert parallel.seeds == serial.seeds
        np.testing.assert_array_equal(parallel.cumulative, serial.cumulative)

    def test_zero_width_band(self, base_optimum):
        """Deterministic gaps and jobs with frozen learning give identical runs."""
        config = replace(
            tiny_config(),
            arrivals=ArrivalSpec.renewal(UnitDist.deterministic()),
            service=UnitDist.deterministic(),
            schedule=HyperSchedule(c_eta=0.0, c_delta=0.0, c_T=5.0, L=6),
        )
        report = replicate(config, 5, optimum=base_optimum)
        np.testing.assert_allclose(report.band_hi - report.band_lo, 0.0, atol=1e-9)

    def test_two_seed_blocks_agree(self, base_optimum):
        """Final mean regret of two disjoint seed blocks agrees within CLT error."""
        config = tiny_config(schedule=HyperSchedule(c_T=5.0, L=20))
        first = replicate(config, 50, seed0=0, optimum=base_optimum)
        second = replicate(config, 50, seed0=50, optimum=base_optimum)
        finals = np.array([o.regret.final_regret for o in first.outcomes + second.outcomes])
        se = finals.std(ddof=1) / np.sqrt(len(finals))
        assert abs(first.cumulative[-1] - second.cumulative[-1]) < 6 * se

    def test_benchmark_from_config(self):
        optimum = benchmark_optimum(tiny_config(), grid=100)
        assert optimum.policy.mu == pytest.approx(8.18, abs=0.01)

    def test_run_experiment_dispatches_ppto(self, base_optimum):
        config = tiny_config(method="ppto", pto=PtoSettings(theta=0.15, total_time=5000.0, opt_chunks=2))
        outcome = run_experiment(config, 0, base_optimum)
        assert outcome.regret.times[-1] == pytest.approx(5000.0)
        assert outcome.final_distance == outcome.result.final_policy.distance(base_optimum.policy)

    def test_failure_names_seed(self, base_optimum, monkeypatch):
        def broken(config, seed, optimum):
            raise RuntimeError("boom")

        monkeypatch.setattr(replicate_module, "run_experiment", broken)
        with pytest.raises(ReplicationError) as exc:
            replicate(tiny_config(), 2, seed0=7, optimum=base_optimum)
        assert exc.value.seed == 7

    @pytest.mark.asyncio
    async def test_progress_callback(self, base_optimum):
        seen = []

        async def on_progress(seed, finished, total):
            seen.append((seed, finished, total))

        report = await replicate_async(tiny_config(), 3, seed0=1, on_progress=on_progress, optimum=base_optimum)
        assert seen == [(1, 1, 3), (2, 2, 3), (3, 3, 3)]
        assert report.n_runs == 3

    @pytest.mark.asyncio
    async def test_orchestrator_rejects_bad_counts(self, base_optimum):
        with pytest.raises(DomainError):
            ReplicationOrchestrator(jobs=0)
        with pytest.raises(DomainError):
            await ReplicationOrchestrator().run(tiny_config(), 0, optimum=base_optimum)

    def test_aggregate_needs_runs(self, base_optimum):
        with pytest.raises(DomainError):
            aggregate([], base_optimum)

    def test_mean_trajectory(self, base_optimum):
        report = replicate(tiny_config(), 2, optimum=base_optimum)
        assert report.mean_trajectory().shape == (7, 2)
        assert list(report.frame().columns) == ["time", "mean_regret", "band_lo", "band_hi"]


class TestOutputs:
    """Tests for output directories and charts."""

    def test_run_outputs(self, tmp_path, base_optimum):
        config = tiny_config(output=OutputSettings(trace_dump=True))
        outcome = run_experiment(config, 3, base_optimum)
        directory = write_run_outputs(config, outcome.result, outcome.regret, base_optimum, tmp_path, svg=False)
        assert directory.name == "tiny-seed3"
        for name in ("config.json", "seeds.json", "cycles.csv", "iterations.csv", "trace.csv", "regret.csv", "summary.json"):
            assert (directory / name).exists(), name
        summary = json.loads((directory / "summary.json").read_text())
        assert summary["seed"] == 3
        assert summary["final_regret"] == pytest.approx(outcome.regret.final_regret)
        cycles = pd.read_csv(directory / "cycles.csv")
        assert len(cycles) == 12

    def test_pto_run_outputs(self, tmp_path, base_optimum):
        config = tiny_config(method="ppto", pto=PtoSettings(theta=0.15, total_time=5000.0, opt_chunks=2))
        outcome = run_experiment(config, 0, base_optimum)
        directory = write_run_outputs(config, outcome.result, outcome.regret, base_optimum, tmp_path, svg=False)
        assert (directory / "ledger.csv").exists()
        summary = json.loads((directory / "summary.json").read_text())
        assert set(summary["pto"]["fitted_params"]) == {"M0", "a", "b"}

    def test_replication_outputs(self, tmp_path, base_optimum):
        config = tiny_config()
        report = replicate(config, 2, seed0=5, optimum=base_optimum)
        directory = write_replication_outputs(config, report, 5, tmp_path, svg=False)
        assert directory.name == "tiny-rep2-seed05"
        frame = pd.read_csv(directory / "regret.csv")
        assert list(frame.columns) == ["time", "mean_regret", "band_lo", "band_hi"]
        summary = json.loads((directory / "summary.json").read_text())
        assert summary["runs"] == 2

    def test_figure_panels(self, base_optimum):
        report = replicate(tiny_config(), 2, optimum=base_optimum)
        fig = replication_figure(report, title="tiny")
        names = [trace.name for trace in fig.data]
        assert names == ["10-90% band", "regret", "(μ, p)", "x*"]

    def test_save_falls_back_to_html(self, tmp_path, monkeypatch):
        def no_engine(self, *args, **kwargs):
            raise ValueError("no static export engine")

        monkeypatch.setattr(go.Figure, "write_image", no_engine)
        fig = regret_figure(np.array([0.0, 1.0]), np.array([0.0, 0.5]))
        path = save_figure(fig, tmp_path)
        assert path == tmp_path / "regret.html"
        assert path.exists()


class TestOracles:
    """Tests for the simulator self-checks."""

    def test_dispersion_pvalue_is_probability(self):
        value = poisson_dispersion_pvalue(2.0, 5.0, 2000, seed=3)
        assert 0.0 <= value <= 1.0
        assert value > 0.001

    @pytest.mark.slow
    def test_quick_oracles_pass(self):
        checks = simulator_oracles(seed=0, quick=True)
        assert checks
        failed = [c.name for c in checks if not c.passed]
        assert not failed
        names = [c.name for c in checks]
        assert "gim1-mean-workload E2/M/1 rho=0.7" in names
        assert all(c.tolerance <= 0.02 for c in checks if "mean-workload" in c.name)

    def test_e2m1_readings(self):
        """Both argument orders are reported next to the optimum they are compared with."""
        readings = e2m1_readings()
        assert set(readings) == {"optimum mu", "optimum p", "optimum f", "mu=3.75, p=7.78", "mu=7.78, p=3.75"}
        assert BASE_BOX.mu_lo <= readings["optimum mu"] <= BASE_BOX.mu_hi
        assert BASE_BOX.p_lo <= readings["optimum p"] <= BASE_BOX.p_hi
        # (7.78, 3.75) lies inside the box, so it cannot beat the optimum
        assert readings["optimum f"] <= readings["mu=7.78, p=3.75"] + 1e-6
        assert all(np.isfinite(value) for value in readings.values())


@functools.lru_cache(maxsize=None)
def desk_report(name: str, label: str):
    """Ten-seed replication of one desk config, shared across the acceptance tests."""
    config = find_config(name, label)
    return replicate(config, config.replications)


def mean_final_regret(report) -> float:
    return float(np.mean([outcome.regret.final_regret for outcome in report.outcomes]))


@pytest.mark.slow
class TestAcceptance:
    """Convergence and comparison targets on the desk presets (ten seeds each)."""

    def test_base_converges(self):
        report = desk_report("base-6.1-desk", "base-desk")
        assert report.n_runs == 10
        assert report.median_final_distance <= 0.5
        assert report.final_relative_regret < 0.10
        assert report.fit is not None
        assert report.fit.slope <= 0.55

    def test_e2m1_converges(self):
        report = desk_report("e2m1-6.4-desk", "e2m1-desk")
        assert report.median_final_distance <= 0.5

    def test_converges_on_nonconvex_box(self):
        """The base objective is not convex on its box, and the learner still reaches x*."""
        config = find_config("base-6.1-desk", "base-desk")
        assert config.box == BASE_BOX
        convexity = objective_convexity_report(config.system().objective(), config.box, grid=100)
        assert not convexity.convex
        assert desk_report("base-6.1-desk", "base-desk").median_final_distance <= 0.5

    def test_liquar_beats_ppto_in_heavy_traffic(self):
        configs = preset("pto-heavy-6.3-desk")
        learner = mean_final_regret(desk_report("pto-heavy-6.3-desk", configs[0].label))
        baselines = [mean_final_regret(desk_report("pto-heavy-6.3-desk", c.label)) for c in configs[1:]]
        assert len(baselines) == 5
        assert learner < min(baselines)

    @pytest.mark.parametrize("theta", [0.06, 0.15])
    def test_ppto_suffers_more_in_heavy_traffic(self, theta):
        """Relative regret of pPTO at exploration ratio θ is larger at h0 = 0.001 than at h0 = 1."""
        heavy = desk_report("pto-heavy-6.3-desk", f"pto-heavy-ppto-theta{theta:g}-desk")
        light = desk_report("pto-light-6.3-desk", f"pto-light-ppto-theta{theta:g}-desk")
        assert heavy.final_relative_regret > light.final_relative_regret
