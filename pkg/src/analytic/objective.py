"""
Ground-truth objectives.

The long-run cost rate of a policy x = (μ, p) is

    f(μ, p) = h0 E[W∞(μ, p)] + c(μ) - p λ(p)

and the profit is -f. For Poisson arrivals E[W∞] is the Pollaczek–Khinchine
mean workload; GI/M/1 objectives live in ``src.analytic.gim1``.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.demand.models import DemandModel, StaffingCost
from src.queue_sim.trace import Policy
from src.utils.errors import DomainError, UnstablePolicyError

FD_STEP = 1e-5


def pk_mean_workload(lam: float, mu: float, scv: float) -> float:
    """
    Stationary M/G/1 mean workload, ρ/(1-ρ) · (1 + c_s²)/2.

    Exact up to floating-point rounding of μ - λ: (0.99, 1, 1) evaluates
    to 98.99999999999991, within 1e-12 relative of 99.

    Args:
        lam: Arrival rate (≥ 0)
        mu: Service rate
        scv: Squared coefficient of variation of individual workloads

    Raises:
        UnstablePolicyError: If lam ≥ mu
    """
    if lam < 0:
        raise DomainError(f"Arrival rate must be non-negative, got {lam}")
    if lam >= mu:
        raise UnstablePolicyError(lam, mu)
    return lam / (mu - lam) * (1.0 + scv) / 2.0


def mixed_partial_coefficient(lam: float, mu: float, h0c: float) -> float:
    """
    -h0C(μ+λ)/(μ-λ)³, the coefficient of λ'(p) in ∂²f/∂μ∂p.

    For the PK objective ∂²f/∂μ∂p equals this value times λ'(p).
    """
    return -h0c * (mu + lam) / (mu - lam) ** 3


class Objective(ABC):
    """
    A cost-rate objective over (μ, p).

    Subclasses supply a vectorized ``values``; derivatives default to
    central finite differences and can be overridden with closed forms.
    """

    @abstractmethod
    def values(self, mu, p) -> np.ndarray:
        """f on arrays of (mu, p); +inf where the policy is unstable."""

    def arrival_rate(self, p):
        return np.zeros_like(np.asarray(p, dtype=float))

    def rho(self, mu, p):
        return self.arrival_rate(p) / np.asarray(mu, dtype=float)

    def value(self, mu: float, p: float) -> float:
        v = float(self.values(mu, p))
        if not np.isfinite(v):
            raise UnstablePolicyError(float(self.arrival_rate(p)), mu)
        return v

    def profit(self, mu: float, p: float) -> float:
        return -self.value(mu, p)

    def gradient_components(self, mu, p, h: float = FD_STEP) -> Tuple[np.ndarray, np.ndarray]:
        mu = np.asarray(mu, dtype=float)
        p = np.asarray(p, dtype=float)
        hm = h * np.maximum(1.0, np.abs(mu))
        hp = h * np.maximum(1.0, np.abs(p))
        d_mu = (self.values(mu + hm, p) - self.values(mu - hm, p)) / (2 * hm)
        d_p = (self.values(mu, p + hp) - self.values(mu, p - hp)) / (2 * hp)
        return d_mu, d_p

    def hessian_components(self, mu, p, h: float = 1e-4) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        mu = np.asarray(mu, dtype=float)
        p = np.asarray(p, dtype=float)
        hm = h * np.maximum(1.0, np.abs(mu))
        hp = h * np.maximum(1.0, np.abs(p))
        gm_plus, gp_plus = self.gradient_components(mu + hm, p)
        gm_minus, gp_minus = self.gradient_components(mu - hm, p)
        gm_up, gp_up = self.gradient_components(mu, p + hp)
        gm_down, gp_down = self.gradient_components(mu, p - hp)
        f_mm = (gm_plus - gm_minus) / (2 * hm)
        f_pp = (gp_up - gp_down) / (2 * hp)
        f_mp = 0.5 * ((gp_plus - gp_minus) / (2 * hm) + (gm_up - gm_down) / (2 * hp))
        return f_mm, f_mp, f_pp

    def gradient(self, mu: float, p: float) -> np.ndarray:
        d_mu, d_p = self.gradient_components(mu, p)
        return np.array([float(d_mu), float(d_p)])

    def hessian(self, mu: float, p: float) -> np.ndarray:
        f_mm, f_mp, f_pp = self.hessian_components(mu, p)
        return np.array([[float(f_mm), float(f_mp)], [float(f_mp), float(f_pp)]])


@dataclass(frozen=True)
class PKObjective(Objective):
    """
    M/G/1 objective h0·PK(λ(p), μ, c_s²) + c(μ) - pλ(p) with closed-form
    derivatives.
    """
    demand: DemandModel
    cost: StaffingCost
    h0: float
    scv: float = 1.0

    @property
    def h0c(self) -> float:
        return self.h0 * (1.0 + self.scv) / 2.0

    def arrival_rate(self, p):
        return self.demand.rate(p)

    def values(self, mu, p):
        mu = np.asarray(mu, dtype=float)
        lam = self.demand.rate(p)
        gap = mu - lam
        with np.errstate(divide="ignore", invalid="ignore"):
            holding = np.where(gap > 0, self.h0c * lam / np.where(gap > 0, gap, 1.0), np.inf)
        return holding + self.cost.value(mu) - np.asarray(p, dtype=float) * lam

    def gradient_components(self, mu, p, h: float = FD_STEP):
        mu = np.asarray(mu, dtype=float)
        p = np.asarray(p, dtype=float)
        lam, d1 = self.demand.rate(p), self.demand.d1(p)
        gap = mu - lam
        d_mu = -self.h0c * lam / gap**2 + self.cost.d1(mu)
        d_p = self.h0c * mu * d1 / gap**2 - lam - p * d1
        return d_mu, d_p

    def hessian_components(self, mu, p, h: float = 1e-4):
        mu = np.asarray(mu, dtype=float)
        p = np.asarray(p, dtype=float)
        lam, d1, d2 = self.demand.rate(p), self.demand.d1(p), self.demand.d2(p)
        gap = mu - lam
        f_mm = 2.0 * self.h0c * lam / gap**3 + self.cost.d2(mu)
        f_mp = -self.h0c * d1 * (mu + lam) / gap**3
        f_pp = self.h0c * mu * (d2 / gap**2 + 2.0 * d1**2 / gap**3) - 2.0 * d1 - p * d2
        return f_mm, f_mp, f_pp

    def mean_workload(self, mu: float, p: float) -> float:
        return pk_mean_workload(float(self.demand.rate(p)), mu, self.scv)

    def _require_stable(self, mu: float, p: float) -> None:
        lam = float(self.demand.rate(p))
        if lam >= mu:
            raise UnstablePolicyError(lam, mu)

    def gradient(self, mu: float, p: float) -> np.ndarray:
        self._require_stable(mu, p)
        return super().gradient(mu, p)

    def hessian(self, mu: float, p: float) -> np.ndarray:
        self._require_stable(mu, p)
        return super().hessian(mu, p)


@dataclass(frozen=True)
class QuadraticObjective(Objective):
    """
    f(x) = ½ (x - c)ᵀ A (x - c) + f0, a known-answer objective for tests
    of the convexity and finite-difference machinery.
    """
    center: Tuple[float, float]
    matrix: Tuple[Tuple[float, float], Tuple[float, float]]
    offset: float = 0.0

    def values(self, mu, p):
        (a, b), (_, d) = self.matrix
        x = np.asarray(mu, dtype=float) - self.center[0]
        y = np.asarray(p, dtype=float) - self.center[1]
        return 0.5 * (a * x**2 + 2 * b * x * y + d * y**2) + self.offset

    def gradient_components(self, mu, p, h: float = FD_STEP):
        (a, b), (_, d) = self.matrix
        x = np.asarray(mu, dtype=float) - self.center[0]
        y = np.asarray(p, dtype=float) - self.center[1]
        return a * x + b * y, b * x + d * y

    def hessian_components(self, mu, p, h: float = 1e-4):
        (a, b), (_, d) = self.matrix
        ones = np.ones_like(np.asarray(mu, dtype=float))
        return a * ones, b * ones, d * ones


# ═══════════════════════════════════════════════════════════════════════════════
# OPERATIONS ON POLICIES
# ═══════════════════════════════════════════════════════════════════════════════

def objective_f(policy: Policy, demand: DemandModel, cost: StaffingCost, h0: float, scv: float) -> float:
    """f(μ, p) for a stable policy; raises UnstablePolicyError otherwise."""
    return PKObjective(demand, cost, h0, scv).value(policy.mu, policy.p)


def grad_f(policy: Policy, demand: DemandModel, cost: StaffingCost, h0: float, scv: float) -> np.ndarray:
    """(∂f/∂μ, ∂f/∂p) in closed form."""
    return PKObjective(demand, cost, h0, scv).gradient(policy.mu, policy.p)


def hessian_f(policy: Policy, demand: DemandModel, cost: StaffingCost, h0: float, scv: float) -> np.ndarray:
    """Symmetric 2×2 Hessian of f in closed form."""
    return PKObjective(demand, cost, h0, scv).hessian(policy.mu, policy.p)
