"""
Unit-mean random variables.

Individual workloads and scaled inter-arrival times are drawn from one of
four families, each parametrized so that the mean is exactly one.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np

from src.stochastic.streams import RngStream
from src.utils.errors import ConfigError, DomainError


class DistFamily(str, Enum):
    EXPONENTIAL = "exponential"
    ERLANG = "erlang"
    HYPEREXP2 = "hyperexp2"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class UnitDist:
    """
    A unit-mean distribution.

    Attributes:
        family: Distribution family
        k: Number of phases (Erlang only); each phase has rate k
        p1: Probability of the first branch (two-phase hyperexponential)
        r1: Rate of the first branch
        r2: Rate of the second branch
    """
    family: DistFamily
    k: int = 1
    p1: float = 0.5
    r1: float = 1.0
    r2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", DistFamily(self.family))
        if self.family == DistFamily.ERLANG:
            if int(self.k) != self.k or self.k < 1:
                raise DomainError(f"Erlang phase count must be a positive integer, got {self.k}")
            object.__setattr__(self, "k", int(self.k))
        if self.family == DistFamily.HYPEREXP2:
            if not 0.0 < self.p1 < 1.0 or self.r1 <= 0 or self.r2 <= 0:
                raise DomainError(
                    f"Invalid hyperexponential parameters p1={self.p1}, r1={self.r1}, r2={self.r2}"
                )
            mean = self.p1 / self.r1 + (1.0 - self.p1) / self.r2
            if abs(mean - 1.0) > 1e-9:
                raise DomainError(
                    f"Hyperexponential parameters give mean {mean:.12g}; the mean must be 1"
                )

    # ═══════════════════════════════════════════════════════════════════════
    # CONSTRUCTORS
    # ═══════════════════════════════════════════════════════════════════════

    @classmethod
    def exponential(cls) -> "UnitDist":
        return cls(DistFamily.EXPONENTIAL)

    @classmethod
    def erlang(cls, k: int) -> "UnitDist":
        return cls(DistFamily.ERLANG, k=k)

    @classmethod
    def deterministic(cls) -> "UnitDist":
        return cls(DistFamily.DETERMINISTIC)

    @classmethod
    def hyperexp(cls, p1: float, r1: float, r2: float) -> "UnitDist":
        return cls(DistFamily.HYPEREXP2, p1=p1, r1=r1, r2=r2)

    # ═══════════════════════════════════════════════════════════════════════
    # MOMENTS AND TRANSFORMS
    # ═══════════════════════════════════════════════════════════════════════

    def mean(self) -> float:
        if self.family == DistFamily.HYPEREXP2:
            return self.p1 / self.r1 + (1.0 - self.p1) / self.r2
        return 1.0

    def scv(self) -> float:
        """Squared coefficient of variation, Var/Mean²."""
        if self.family == DistFamily.EXPONENTIAL:
            return 1.0
        if self.family == DistFamily.ERLANG:
            return 1.0 / self.k
        if self.family == DistFamily.DETERMINISTIC:
            return 0.0
        p2 = 1.0 - self.p1
        second_moment = 2.0 * (self.p1 / self.r1**2 + p2 / self.r2**2)
        return second_moment / self.mean() ** 2 - 1.0

    def laplace(self, x):
        """Laplace–Stieltjes transform E[exp(-xU)], vectorized over x ≥ 0."""
        x = np.asarray(x, dtype=float)
        if self.family == DistFamily.EXPONENTIAL:
            return 1.0 / (1.0 + x)
        if self.family == DistFamily.ERLANG:
            return (self.k / (self.k + x)) ** self.k
        if self.family == DistFamily.DETERMINISTIC:
            return np.exp(-x)
        p2 = 1.0 - self.p1
        return self.p1 * self.r1 / (self.r1 + x) + p2 * self.r2 / (self.r2 + x)

    # ═══════════════════════════════════════════════════════════════════════
    # SAMPLING
    # ═══════════════════════════════════════════════════════════════════════

    def draw(self, rng: RngStream | np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` independent values."""
        gen = rng.generator if isinstance(rng, RngStream) else rng
        if self.family == DistFamily.EXPONENTIAL:
            return gen.exponential(1.0, size)
        if self.family == DistFamily.ERLANG:
            return gen.gamma(self.k, 1.0 / self.k, size)
        if self.family == DistFamily.DETERMINISTIC:
            return np.ones(size)
        first = gen.random(size) < self.p1
        rates = np.where(first, self.r1, self.r2)
        return gen.exponential(1.0, size) / rates

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"family": self.family.value}
        if self.family == DistFamily.ERLANG:
            data["k"] = self.k
        elif self.family == DistFamily.HYPEREXP2:
            data.update({"p1": self.p1, "r1": self.r1, "r2": self.r2})
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], key: str = "service") -> "UnitDist":
        if not isinstance(data, dict) or "family" not in data:
            raise ConfigError(f"{key}.family", "a distribution needs a 'family' entry")
        try:
            family = DistFamily(data["family"])
        except ValueError:
            choices = ", ".join(f.value for f in DistFamily)
            raise ConfigError(f"{key}.family", f"unknown family {data['family']!r}; choose from {choices}")

        allowed = {"family"} | {
            DistFamily.ERLANG: {"k"},
            DistFamily.HYPEREXP2: {"p1", "r1", "r2", "scv"},
        }.get(family, set())
        for name in data:
            if name not in allowed:
                raise ConfigError(f"{key}.{name}", f"not a parameter of the {family.value} family")

        try:
            if family == DistFamily.ERLANG:
                return cls.erlang(int(data.get("k", 2)))
            if family == DistFamily.HYPEREXP2:
                if "scv" in data:
                    return hyperexp_from_scv(float(data["scv"]))
                return cls.hyperexp(float(data["p1"]), float(data["r1"]), float(data["r2"]))
        except KeyError as e:
            raise ConfigError(f"{key}.{e.args[0]}", "missing parameter")
        except DomainError as e:
            raise ConfigError(key, str(e))
        return cls(family)


def sample(dist: UnitDist, rng: RngStream) -> float:
    """Draw a single value from ``dist``."""
    return float(dist.draw(rng, 1)[0])


def hyperexp_from_scv(target_scv: float) -> UnitDist:
    """
    Two-moment hyperexponential fit with balanced means.

    The branches satisfy p1/r1 = p2/r2 = 1/2 so each contributes half of the
    unit mean.

    Args:
        target_scv: Desired squared coefficient of variation, at least 1

    Returns:
        A HyperExp2 UnitDist with mean 1 and SCV ``target_scv``

    Raises:
        DomainError: If ``target_scv`` < 1 (no two-phase hyperexponential exists)
    """
    if target_scv < 1.0:
        raise DomainError(
            f"A two-phase hyperexponential has SCV >= 1; got {target_scv}.\n"
            "Use an Erlang family for less variable service."
        )
    p1 = 0.5 * (1.0 + math.sqrt((target_scv - 1.0) / (target_scv + 1.0)))
    p2 = 1.0 - p1
    return UnitDist.hyperexp(p1, 2.0 * p1, 2.0 * p2)


def service_for_scv(scv: float) -> UnitDist:
    """Pick the family used for a given service SCV (0.5 → E2, 1 → M, >1 → H2)."""
    if scv == 0.0:
        return UnitDist.deterministic()
    if scv == 1.0:
        return UnitDist.exponential()
    if scv > 1.0:
        return hyperexp_from_scv(scv)
    k = round(1.0 / scv)
    if abs(1.0 / k - scv) > 1e-12:
        raise DomainError(f"SCV {scv} below 1 must be 1/k for an integer k")
    return UnitDist.erlang(k)
