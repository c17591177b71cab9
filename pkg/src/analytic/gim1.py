"""
GI/M/1 stationary quantities from the root equation σ = Ã(μ(1 - σ)).

Ã is the Laplace transform of the inter-arrival time U/λ, so
Ã(s) = L_U(s/λ). An arriving customer finds a geometric number of
customers, N ~ P(N ≥ n) = σⁿ, which gives the mean wait σ/(μ(1 - σ)). The
time-stationary number in system has P(N = n) = ρ(1 - σ)σⁿ⁻¹ for n ≥ 1, so
with exponential service the time-average workload is ρ/(1 - σ).
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.analytic.objective import Objective
from src.demand.models import DemandModel, StaffingCost
from src.stochastic.distributions import UnitDist
from src.utils.errors import ConfigError, DomainError, UnstablePolicyError

BISECTION_STEPS = 64
HOLDING_BASES = ("arrival", "time_average")


@dataclass
class GIM1Result:
    """Stationary summary of a GI/M/1 queue."""
    sigma: float
    rho: float
    mean_wait: float
    mean_wait_work: float
    mean_workload: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "sigma": self.sigma,
            "rho": self.rho,
            "mean_wait": self.mean_wait,
            "mean_wait_work": self.mean_wait_work,
            "mean_workload": self.mean_workload,
        }


def gim1_root(interarrival: UnitDist, lam, mu) -> np.ndarray:
    """
    Vectorized bisection for σ in (0, 1); NaN where lam ≥ mu.

    The bracket's upper end sits just below 1, where the root-equation
    residual Ã(μ(1-σ)) - σ is negative for every stable input.
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    lam, mu = np.broadcast_arrays(lam, mu)
    stable = (lam < mu) & (lam > 0)
    safe_lam = np.where(stable, lam, 1.0)
    safe_mu = np.where(stable, mu, 2.0)
    rho = safe_lam / safe_mu

    lo = np.zeros_like(rho)
    hi = 1.0 - (1.0 - rho) * 1e-6
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        residual = interarrival.laplace(safe_mu * (1.0 - mid) / safe_lam) - mid
        right = residual > 0
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)

    sigma = 0.5 * (lo + hi)
    sigma = np.where(lam == 0, 0.0, sigma)
    return np.where(stable | (lam == 0), sigma, np.nan)


def gim1_steady_state(interarrival: UnitDist, lam: float, mu: float) -> GIM1Result:
    """
    Solve the GI/M/1 root equation and derive mean wait and workload.

    Args:
        interarrival: Unit-mean inter-arrival law U (gaps are U/lam)
        lam: Arrival rate
        mu: Service rate

    Returns:
        GIM1Result with σ, ρ, the arrival-epoch wait in time and in work
        units, and the time-average workload

    Raises:
        UnstablePolicyError: If lam ≥ mu
        DomainError: If the residual does not change sign on (0, 1)
    """
    if lam < 0:
        raise DomainError(f"Arrival rate must be non-negative, got {lam}")
    if lam >= mu:
        raise UnstablePolicyError(lam, mu)
    rho = lam / mu
    if lam == 0:
        return GIM1Result(0.0, 0.0, 0.0, 0.0, 0.0)

    top = 1.0 - (1.0 - rho) * 1e-6
    if float(interarrival.laplace(mu * (1.0 - top) / lam)) - top >= 0:
        raise DomainError(f"No GI/M/1 root in (0, 1) for lam={lam}, mu={mu}")

    sigma = float(gim1_root(interarrival, lam, mu))
    return GIM1Result(
        sigma=sigma,
        rho=rho,
        mean_wait=sigma / (mu * (1.0 - sigma)),
        mean_wait_work=sigma / (1.0 - sigma),
        mean_workload=rho / (1.0 - sigma),
    )


@dataclass(frozen=True)
class GIM1Objective(Objective):
    """
    GI/M/1 objective h0·E[holding] + c(μ) - pλ(p).

    ``basis`` picks the holding measure: ``arrival`` uses the workload an
    arriving customer sees, σ/(1-σ); ``time_average`` uses the
    time-stationary workload ρ/(1-σ). Under Poisson arrivals the two agree.
    """
    demand: DemandModel
    cost: StaffingCost
    h0: float
    interarrival: UnitDist
    basis: str = "arrival"

    def __post_init__(self):
        if self.basis not in HOLDING_BASES:
            raise ConfigError("holding_basis", f"must be one of {HOLDING_BASES}, got {self.basis!r}")

    def arrival_rate(self, p):
        return self.demand.rate(p)

    def values(self, mu, p):
        mu = np.asarray(mu, dtype=float)
        lam = self.demand.rate(p)
        sigma = gim1_root(self.interarrival, lam, mu)
        if self.basis == "arrival":
            holding = sigma / (1.0 - sigma)
        else:
            holding = (lam / mu) / (1.0 - sigma)
        holding = np.where(np.isnan(sigma), np.inf, holding)
        return self.h0 * holding + self.cost.value(mu) - np.asarray(p, dtype=float) * lam


def swapped_readings(objective: Objective, first: float = 3.75, second: float = 7.78) -> Dict[str, float]:
    """
    Objective at (μ, p) = (first, second) and at the swapped pair.

    Unstable readings are reported as +inf.
    """
    readings = {}
    for mu, p in ((first, second), (second, first)):
        readings[f"mu={mu}, p={p}"] = float(objective.values(mu, p))
    return readings
