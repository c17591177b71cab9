"""
Pytest configuration and shared fixtures for LiQUAR tests.
"""

import pytest

from src.demand.models import DemandModel, FeasibleBox, StaffingCost
from src.liquar.schedule import HyperSchedule
from src.queue_sim.trace import Policy, build_trace
from src.system import QueueSystem


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "slow: long Monte-Carlo runs (deselect with -m 'not slow')"
    )


@pytest.fixture
def base_demand():
    """Logit demand 10/(1 + exp(p - 4.1)) of the base experiment."""
    return DemandModel.logit(10.0, 4.1, 1.0)


@pytest.fixture
def base_box():
    """Decision box [6.5, 10] × [3.5, 7], uniformly stable under base demand."""
    return FeasibleBox(6.5, 10.0, 3.5, 7.0)


@pytest.fixture
def base_cost():
    """Linear staffing cost c(μ) = μ."""
    return StaffingCost.linear(1.0)


@pytest.fixture
def base_system(base_demand, base_cost, base_box):
    """M/M/1 system with h0 = 1 on the base box."""
    return QueueSystem(base_demand, base_cost, 1.0, base_box)


@pytest.fixture
def short_schedule():
    """
    A few short iterations of the base sequences.

    Used where a run has to finish quickly; not for convergence checks.
    """
    return HyperSchedule(c_T=20.0, L=8)


@pytest.fixture
def scripted_trace():
    """w0 = 1, μ = 2, one job of size 1 at t = 1, cycle length 2."""
    return build_trace(1.0, Policy(2.0, 0.0), 2.0, [1.0], [1.0])
