"""Hyperparameter sequences η_k, T_k, δ_k and the trimming fraction α."""

import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict

import numpy as np

from src.utils.errors import ConfigError


@dataclass(frozen=True)
class HyperSchedule:
    """
    η_k = c_eta·k^(-a),  T_k = c_T·k^b,  δ_k = min(delta_cap, c_delta·k^(-c)).

    Defaults are the base experiment: η_k = 4/k, T_k = 200 k^(1/3),
    δ_k = min(0.1, 0.5 k^(-1/3)), α = 0.1, L = 1000. Setting ``c_eta`` or
    ``c_delta`` to zero gives a frozen (non-learning) schedule.
    """
    c_eta: float = 4.0
    a: float = 1.0
    c_T: float = 200.0
    b: float = 1.0 / 3.0
    c_delta: float = 0.5
    c: float = 1.0 / 3.0
    delta_cap: float = 0.1
    alpha: float = 0.1
    L: int = 1000

    def __post_init__(self):
        if self.c_eta < 0:
            raise ConfigError("schedule.c_eta", "step-size constant must be non-negative")
        if self.c_T <= 0:
            raise ConfigError("schedule.c_T", "cycle-length constant must be positive")
        if self.c_delta < 0:
            raise ConfigError("schedule.c_delta", "perturbation constant must be non-negative")
        if self.delta_cap < 0:
            raise ConfigError("schedule.delta_cap", "perturbation cap must be non-negative")
        if not 0.0 <= self.alpha < 0.5:
            raise ConfigError("schedule.alpha", f"trim fraction must lie in [0, 1/2), got {self.alpha}")
        if int(self.L) != self.L or self.L < 1:
            raise ConfigError("schedule.L", f"iteration count must be a positive integer, got {self.L}")
        object.__setattr__(self, "L", int(self.L))

    def eta(self, k: int) -> float:
        return self.c_eta * k ** (-self.a)

    def cycle_length(self, k: int) -> float:
        return self.c_T * k**self.b

    def delta(self, k: int) -> float:
        return min(self.delta_cap, self.c_delta * k ** (-self.c))

    def total_time(self, L: int | None = None) -> float:
        """Length of L iterations, 2 Σ T_k."""
        ks = np.arange(1, (L or self.L) + 1)
        return float(2.0 * np.sum(self.c_T * ks**self.b))

    def scaled(self, factor: float) -> "HyperSchedule":
        """Scale step size and perturbation constants together (cap unchanged)."""
        return replace(self, c_eta=self.c_eta * factor, c_delta=self.c_delta * factor)

    def with_cycle_constant(self, c_T: float, base_T: float = 200.0, base_L: int = 1000) -> "HyperSchedule":
        """
        Change T_k's constant and rescale L as ⌈base_L·(base_T/c_T)^(3/4)⌉,
        which keeps the total running time roughly equal.
        """
        L = math.ceil(base_L * (base_T / c_T) ** 0.75)
        return replace(self, c_T=c_T, L=L)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], key: str = "schedule") -> "HyperSchedule":
        if not isinstance(data, dict):
            raise ConfigError(key, "expected a mapping of schedule constants")
        known = set(cls.__dataclass_fields__)
        values = {}
        for name, value in data.items():
            if name not in known:
                raise ConfigError(f"{key}.{name}", f"unknown schedule constant; known: {sorted(known)}")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key}.{name}", f"expected a number, got {value!r}")
            values[name] = value
        return cls(**values)
