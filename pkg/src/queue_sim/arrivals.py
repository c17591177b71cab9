"""
Arrival processes and their state across cycle boundaries.

Inter-arrival gaps are U/λ with U a unit-mean variable (exponential for a
Poisson process). At a control change the residual gap of a renewal
process is discarded and a fresh gap is started at the new rate.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.stochastic.distributions import DistFamily, UnitDist
from src.stochastic.streams import RngStream
from src.utils.errors import ConfigError, DomainError


class ArrivalKind(str, Enum):
    POISSON = "poisson"
    RENEWAL = "renewal"


@dataclass(frozen=True)
class ArrivalSpec:
    """Rate-free description of the arrival stream (kind plus gap law)."""
    kind: ArrivalKind = ArrivalKind.POISSON
    interarrival: UnitDist = UnitDist(DistFamily.EXPONENTIAL)

    def __post_init__(self):
        object.__setattr__(self, "kind", ArrivalKind(self.kind))
        if self.kind == ArrivalKind.POISSON and self.interarrival.family != DistFamily.EXPONENTIAL:
            raise DomainError("Poisson arrivals have exponential gaps")

    @classmethod
    def poisson(cls) -> "ArrivalSpec":
        return cls()

    @classmethod
    def renewal(cls, interarrival: UnitDist) -> "ArrivalSpec":
        return cls(ArrivalKind.RENEWAL, interarrival)

    def at_rate(self, rate: float) -> "ArrivalProcess":
        return ArrivalProcess(self.kind, float(rate), self.interarrival)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind == ArrivalKind.RENEWAL:
            data["interarrival"] = self.interarrival.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], key: str = "arrivals") -> "ArrivalSpec":
        if not isinstance(data, dict):
            raise ConfigError(key, "expected a mapping with 'kind'")
        for name in data:
            if name not in ("kind", "interarrival"):
                raise ConfigError(f"{key}.{name}", "unknown key")
        try:
            kind = ArrivalKind(data.get("kind", "poisson"))
        except ValueError:
            raise ConfigError(f"{key}.kind", f"unknown arrival kind {data.get('kind')!r}; choose poisson or renewal")
        if kind == ArrivalKind.POISSON:
            if "interarrival" in data:
                raise ConfigError(f"{key}.interarrival", "Poisson arrivals take no inter-arrival law")
            return cls()
        if "interarrival" not in data:
            raise ConfigError(f"{key}.interarrival", "renewal arrivals need an inter-arrival law")
        return cls(kind, UnitDist.from_dict(data["interarrival"], f"{key}.interarrival"))


@dataclass(frozen=True)
class ArrivalProcess:
    """An arrival stream at a fixed rate λ."""
    kind: ArrivalKind
    rate: float
    interarrival: UnitDist = UnitDist(DistFamily.EXPONENTIAL)

    def __post_init__(self):
        if self.rate < 0:
            raise DomainError(f"Arrival rate must be non-negative, got {self.rate}")

    @classmethod
    def poisson(cls, rate: float) -> "ArrivalProcess":
        return cls(ArrivalKind.POISSON, rate)

    @classmethod
    def renewal(cls, rate: float, interarrival: UnitDist) -> "ArrivalProcess":
        return cls(ArrivalKind.RENEWAL, rate, interarrival)

    def with_rate(self, rate: float) -> "ArrivalProcess":
        return replace(self, rate=float(rate))


@dataclass(frozen=True)
class ArrivalState:
    """
    Arrival process plus the time remaining until its next arrival.

    ``residual`` is None when the next gap has not been drawn yet, which is
    the state right after a boundary reset.
    """
    process: ArrivalProcess
    residual: Optional[float] = None


def renewal_boundary_reset(state: Optional[ArrivalState], new_rate: float) -> Optional[ArrivalState]:
    """
    Start a fresh inter-arrival gap at ``new_rate``.

    For a Poisson process this changes nothing in distribution.
    """
    if state is None:
        return None
    return ArrivalState(state.process.with_rate(new_rate), residual=None)


def arrival_epochs(
    state: ArrivalState,
    duration: float,
    rng: RngStream,
) -> Tuple[np.ndarray, ArrivalState]:
    """
    Draw the arrival epochs in [0, duration).

    Args:
        state: Process and pending residual at time 0
        duration: Window length
        rng: Stream dedicated to this cycle's arrivals

    Returns:
        (sorted epochs, state at time ``duration``)
    """
    process = state.process
    if process.rate == 0.0:
        return np.empty(0), ArrivalState(process, residual=math.inf)

    law = process.interarrival
    mean_count = process.rate * duration
    batch = int(mean_count + 5.0 * math.sqrt(mean_count) + 10)

    first = state.residual
    gaps = law.draw(rng, batch) / process.rate
    if first is not None:
        gaps = np.concatenate([[first], gaps])
    epochs = np.cumsum(gaps)
    while epochs[-1] < duration:
        more = law.draw(rng, batch) / process.rate
        epochs = np.concatenate([epochs, epochs[-1] + np.cumsum(more)])

    n = int(np.searchsorted(epochs, duration, side="left"))
    residual = float(epochs[n] - duration)
    return epochs[:n], ArrivalState(process, residual=residual)
