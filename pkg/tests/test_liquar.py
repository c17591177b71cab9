"""
Unit tests for the learning engine: schedules, estimation, the
finite-difference gradient and full runs.
"""

import numpy as np
import pandas as pd
import pytest

from src.analytic import PKObjective, QuadraticObjective, solve_optimal
from src.demand.models import FeasibleBox, StaffingCost
from src.liquar import (
    HyperSchedule,
    draw_direction,
    estimate_performance,
    fd_gradient,
    iteration_stream,
    perturbed_policies,
    replay_cycle,
    run_liquar,
    sgd_update,
)
from src.queue_sim import ArrivalSpec, Policy, build_trace, simulate_cycle, workload_integral
from src.stochastic.distributions import UnitDist
from src.stochastic.streams import Purpose, RngStream, cycle_stream
from src.system import QueueSystem
from src.utils.errors import ConfigError, DomainError


class TestHyperSchedule:
    """Tests for the η, T, δ sequences."""

    def test_base_sequences(self):
        """η_k = 4/k, T_k = 200k^(1/3), δ_k = min(0.1, 0.5k^(-1/3))."""
        schedule = HyperSchedule()
        assert schedule.eta(1) == 4.0
        assert schedule.eta(8) == pytest.approx(0.5)
        assert schedule.cycle_length(8) == pytest.approx(400.0)
        assert schedule.delta(1) == 0.1
        assert schedule.delta(1000) == pytest.approx(0.05)

    def test_total_time(self):
        """Each iteration runs two cycles."""
        schedule = HyperSchedule(c_T=10.0, b=0.0, L=5)
        assert schedule.total_time() == pytest.approx(100.0)
        assert schedule.total_time(L=2) == pytest.approx(40.0)

    def test_cycle_constant_keeps_running_time(self):
        """Shorter cycles mean more iterations: c_T = 40 gives L = 3344."""
        schedule = HyperSchedule().with_cycle_constant(40.0)
        assert schedule.c_T == 40.0
        assert schedule.L == 3344
        assert HyperSchedule().with_cycle_constant(200.0).L == 1000

    def test_scaled(self):
        """Scaling touches η and δ constants but not the cap."""
        schedule = HyperSchedule().scaled(0.6)
        assert schedule.c_eta == pytest.approx(2.4)
        assert schedule.c_delta == pytest.approx(0.3)
        assert schedule.delta_cap == 0.1

    @pytest.mark.parametrize("field,value", [("alpha", 0.5), ("c_T", 0.0), ("c_eta", -1.0), ("L", 0)])
    def test_invalid_constants(self, field, value):
        """Invalid constants should name the offending key."""
        with pytest.raises(ConfigError) as exc:
            HyperSchedule(**{field: value})
        assert exc.value.key == f"schedule.{field}"

    def test_from_dict(self):
        assert HyperSchedule.from_dict(HyperSchedule(L=7).to_dict()) == HyperSchedule(L=7)
        with pytest.raises(ConfigError):
            HyperSchedule.from_dict({"gamma": 1.0})
        with pytest.raises(ConfigError):
            HyperSchedule.from_dict({"L": "many"})


class TestDirections:
    """Tests for the random perturbation direction."""

    def test_reproducible(self):
        a = [tuple(draw_direction(RngStream(3, k))) for k in range(20)]
        b = [tuple(draw_direction(RngStream(3, k))) for k in range(20)]
        assert a == b

    def test_uniform_over_two_vectors(self):
        """Each vector appears half the time and the mean is (1, 1)."""
        rng = RngStream(11)
        draws = np.array([draw_direction(rng) for _ in range(100_000)])
        assert set(map(tuple, draws)) == {(0.0, 2.0), (2.0, 0.0)}
        assert np.mean(draws[:, 0] == 2.0) == pytest.approx(0.5, abs=0.01)
        np.testing.assert_allclose(draws.mean(axis=0), [1.0, 1.0], atol=0.01)


class TestEstimatePerformance:
    """Tests for the cycle cost estimate."""

    def test_empty_cycle_costs_staffing(self):
        trace = build_trace(0.0, Policy(3.0, 1.0), 5.0, [], [])
        assert estimate_performance(trace, 0.1, 1.0, StaffingCost.linear(1.0)) == pytest.approx(3.0)

    def test_hand_computed(self):
        """p = 1, one arrival, T = 2, area 0.5, no staffing cost: -1/2 + 1/4."""
        trace = build_trace(1.0, Policy(2.0, 1.0), 2.0, [1.0], [1.0])
        cost = StaffingCost.linear(0.0)
        assert estimate_performance(trace, 0.0, 1.0, cost) == pytest.approx(-0.25)
        assert estimate_performance(trace, 0.0, 1.0, cost, estimator="full") == pytest.approx(-0.25)

    def test_trimming_divides_by_window(self):
        """Only [αT, (1-α)T] enters the holding term; revenue still uses T."""
        trace = build_trace(4.0, Policy(1.0, 2.0), 10.0, [], [])
        # W = 4 - t on [0, 4]; observed part inside [1, 9] is ∫_1^4 (4 - t) dt = 4.5
        value = estimate_performance(trace, 0.1, 1.0, StaffingCost.linear(0.0))
        assert value == pytest.approx(4.5 / 8.0)

    def test_invalid_arguments(self, scripted_trace):
        with pytest.raises(DomainError):
            estimate_performance(scripted_trace, 0.5, 1.0, StaffingCost.linear(1.0))
        with pytest.raises(ConfigError):
            estimate_performance(scripted_trace, 0.1, 1.0, StaffingCost.linear(1.0), estimator="median")

    def test_long_cycle_matches_objective(self, base_system):
        """On a long M/M/1 cycle the estimate is within 2% of f."""
        policy = Policy(8.18, 3.79)
        trace = simulate_cycle(
            0.0, policy, 1e5, base_system.arrival_process(policy.p), UnitDist.exponential(), RngStream(17),
        )
        estimate = estimate_performance(trace, 0.1, 1.0, base_system.cost)
        exact = base_system.objective().value(policy.mu, policy.p)
        assert estimate == pytest.approx(exact, rel=0.02)


class TestGradientAndUpdate:
    """Tests for the finite-difference gradient and the projected step."""

    def test_equal_costs_give_zero(self):
        np.testing.assert_array_equal(fd_gradient(1.5, 1.5, [2.0, 0.0], 0.1), [0.0, 0.0])

    def test_quadratic_oracle(self):
        """f = μ² + p² at (1, 1), δ = 0.1: H = (8, 0) along μ, mean over Z = 2∇f."""
        objective = QuadraticObjective((0.0, 0.0), ((2.0, 0.0), (0.0, 2.0)))
        box = FeasibleBox(0.5, 2.0, 0.0, 2.0)
        xbar = Policy(1.0, 1.0)
        estimates = []
        for Z in (np.array([2.0, 0.0]), np.array([0.0, 2.0])):
            x_minus, x_plus, delta_eff = perturbed_policies(xbar, Z, 0.1, box)
            assert delta_eff == pytest.approx(0.1)
            H = fd_gradient(objective.value(*x_minus.as_array()), objective.value(*x_plus.as_array()), Z, delta_eff)
            estimates.append(H)
        np.testing.assert_allclose(estimates[0], [8.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(np.mean(estimates, axis=0), [4.0, 4.0], atol=1e-12)

    def test_difference_error_is_second_order(self, base_demand, base_cost):
        """Halving δ four times shrinks the bias by about four each time."""
        objective = PKObjective(base_demand, base_cost, 1.0, 1.0)
        box = FeasibleBox(6.5, 10.0, 3.5, 7.0)
        xbar, Z = Policy(8.0, 4.0), np.array([0.0, 2.0])
        exact = objective.gradient(xbar.mu, xbar.p)[1]
        deltas = 0.2 / 2.0 ** np.arange(5)
        errors = []
        for delta in deltas:
            x_minus, x_plus, delta_eff = perturbed_policies(xbar, Z, delta, box)
            H = fd_gradient(objective.value(*x_minus.as_array()), objective.value(*x_plus.as_array()), Z, delta_eff)
            errors.append(abs(H[1] / 4.0 - exact))
        slope = np.polyfit(np.log(deltas), np.log(errors), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.3)

    def test_nonpositive_delta(self):
        with pytest.raises(DomainError):
            fd_gradient(1.0, 2.0, [2.0, 0.0], 0.0)

    def test_sgd_update(self, base_box):
        """Zero gradient keeps x̄; interior steps are exact; exits are clamped per coordinate."""
        xbar = Policy(8.0, 5.0)
        assert sgd_update(xbar, [0.0, 0.0], 1.0, base_box) == xbar
        assert sgd_update(xbar, [1.0, -2.0], 0.5, base_box) == Policy(7.5, 6.0)
        assert sgd_update(xbar, [-10.0, 10.0], 1.0, base_box) == Policy(10.0, 3.5)

    def test_perturbation_clamped_at_boundary(self, base_box):
        """At the upper μ edge only half of the perturbation is applied."""
        x_minus, x_plus, delta_eff = perturbed_policies(Policy(10.0, 5.0), np.array([2.0, 0.0]), 0.1, base_box)
        assert x_plus == Policy(10.0, 5.0)
        assert x_minus == Policy(9.9, 5.0)
        assert delta_eff == pytest.approx(0.05)


class TestRunLiquar:
    """Tests for full learning runs."""

    def test_deterministic(self, base_system, short_schedule):
        """The same seed gives identical cycle and iteration tables."""
        a = run_liquar(base_system, short_schedule, seed=4)
        b = run_liquar(base_system, short_schedule, seed=4)
        pd.testing.assert_frame_equal(a.cycles_frame(), b.cycles_frame())
        pd.testing.assert_frame_equal(a.iterations_frame(), b.iterations_frame())
        assert a.final_policy == b.final_policy

    def test_seeds_differ(self, base_system, short_schedule):
        a = run_liquar(base_system, short_schedule, seed=1)
        b = run_liquar(base_system, short_schedule, seed=2)
        assert not a.cycles_frame()["N_l"].equals(b.cycles_frame()["N_l"])

    def test_feasibility_and_chaining(self, base_system, short_schedule):
        """Every policy stays in the box and workload carries over exactly."""
        result = run_liquar(base_system, short_schedule, seed=8)
        box = base_system.box
        for record in result.records:
            for policy in (record.xbar, record.x_minus, record.x_plus):
                assert box.contains(policy.mu, policy.p)
        assert result.cycles[0].w0 == 0.0
        for before, after in zip(result.cycles, result.cycles[1:]):
            assert after.w0 == before.w_end
        assert [c.l for c in result.cycles] == list(range(1, 2 * short_schedule.L + 1))

    def test_directions_come_from_manifest_streams(self, base_system, short_schedule):
        """Z_k is drawn from the direction stream of cycle 2k-1."""
        result = run_liquar(base_system, short_schedule, seed=6)
        for record in result.records:
            expected = draw_direction(RngStream(6).child(2 * record.k - 1, Purpose.DIRECTION))
            assert record.Z == tuple(expected)

    def test_paired_cycles_share_random_numbers(self, base_system):
        """Cycles 2k-1 and 2k see the same unit-rate gaps and the same job sizes."""
        schedule = HyperSchedule(c_T=20.0, L=12)
        result = run_liquar(base_system, schedule, seed=9)
        directions = set()
        for record in result.records:
            minus, plus = result.cycles[2 * record.k - 2], result.cycles[2 * record.k - 1]
            a, b = replay_cycle(base_system, 9, minus), replay_cycle(base_system, 9, plus)
            rate_minus = base_system.arrival_process(minus.p).rate
            rate_plus = base_system.arrival_process(plus.p).rate
            n = min(a.n_arrivals, b.n_arrivals)
            np.testing.assert_allclose(a.arrival_times[:n] * rate_minus, b.arrival_times[:n] * rate_plus)
            np.testing.assert_array_equal(a.jobs[:n], b.jobs[:n])
            if minus.p == plus.p:
                assert minus.n_arrivals == plus.n_arrivals
            else:
                assert plus.n_arrivals <= minus.n_arrivals
            directions.add(record.Z)
        assert directions == {(0.0, 2.0), (2.0, 0.0)}

    def test_iteration_stream(self):
        assert iteration_stream(4, 3).stream_id == (5,)
        assert iteration_stream(4, 3).child(Purpose.ARRIVALS).stream_id == cycle_stream(4, 5, Purpose.ARRIVALS).stream_id

    def test_zero_step_keeps_policy(self, base_system):
        """η_k = 0 freezes x̄ at the starting point."""
        schedule = HyperSchedule(c_eta=0.0, c_T=10.0, L=5)
        result = run_liquar(base_system, schedule, seed=0, initial=Policy(9.0, 4.5))
        assert all(r.xbar == Policy(9.0, 4.5) for r in result.records)
        assert result.final_policy == Policy(9.0, 4.5)

    def test_zero_perturbation_is_degenerate(self, base_system):
        """δ_k = 0 collapses the pair, so no gradient is formed."""
        schedule = HyperSchedule(c_delta=0.0, c_T=10.0, L=3)
        result = run_liquar(base_system, schedule, seed=0)
        assert all(r.degenerate and r.H == (0.0, 0.0) for r in result.records)

    def test_initial_policy_clamped(self, base_system, short_schedule):
        result = run_liquar(base_system, short_schedule, seed=0, initial=Policy(20.0, 1.0))
        assert result.records[0].xbar == Policy(10.0, 3.5)

    def test_callback_and_trajectory(self, base_system, short_schedule):
        seen = []
        result = run_liquar(base_system, short_schedule, seed=2, on_iteration=seen.append)
        assert [r.k for r in seen] == list(range(1, short_schedule.L + 1))
        trajectory = result.trajectory()
        assert trajectory.shape == (short_schedule.L + 1, 2)
        np.testing.assert_array_equal(trajectory[-1], result.final_policy.as_array())

    def test_full_estimator(self, base_system, short_schedule):
        result = run_liquar(base_system, short_schedule, seed=3, estimator="full")
        assert len(result.records) == short_schedule.L
        with pytest.raises(ConfigError):
            run_liquar(base_system, short_schedule, seed=3, estimator="oracle")

    def test_replay_cycle(self, base_system, short_schedule):
        """A recorded cycle can be re-simulated exactly from its iteration's stream."""
        result = run_liquar(base_system, short_schedule, seed=12)
        for summary in (result.cycles[0], result.cycles[5]):
            trace = replay_cycle(base_system, 12, summary)
            assert trace.n_arrivals == summary.n_arrivals
            assert trace.w_end == summary.w_end
            assert workload_integral(trace, 0.0, trace.duration) == summary.workload_integral

    def test_renewal_arrivals(self, base_demand, base_cost, base_box, short_schedule):
        """Renewal arrivals run with a fresh gap at each control change."""
        system = QueueSystem(base_demand, base_cost, 1.0, base_box, arrivals=ArrivalSpec.renewal(UnitDist.erlang(2)))
        result = run_liquar(system, short_schedule, seed=1)
        assert len(result.cycles) == 2 * short_schedule.L

    @pytest.mark.slow
    def test_distance_to_optimum_shrinks(self, base_system):
        """Median distance to x* over 20 seeds is smaller at k = 200 than at k = 20."""
        x_star = solve_optimal(
            base_system.demand, base_system.cost, 1.0, 1.0, base_system.box,
        ).policy
        schedule = HyperSchedule(L=200)
        early, late = [], []
        for seed in range(20):
            result = run_liquar(base_system, schedule, seed=seed)
            early.append(result.records[19].xbar.distance(x_star))
            late.append(result.records[199].xbar.distance(x_star))
        assert np.median(late) < np.median(early)
