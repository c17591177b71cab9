"""
Demand curves, staffing costs and the feasible decision box.

All evaluations are vectorized over numpy arrays so that grid scans in the
analytic solvers can evaluate a whole mesh in one call.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.special import expit

from src.utils.errors import ConfigError, DomainError, UnstablePolicyError

_PRICE_TOLERANCE = 1e-12


class DemandFamily(str, Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    EXPONENTIAL = "exponential"
    LOGIT = "logit"


PARAM_NAMES: Dict[DemandFamily, Tuple[str, ...]] = {
    DemandFamily.LINEAR: ("a", "b"),
    DemandFamily.QUADRATIC: ("c", "a"),
    DemandFamily.EXPONENTIAL: ("a", "b"),
    DemandFamily.LOGIT: ("M0", "a", "b"),
}


@dataclass(frozen=True)
class DemandModel:
    """
    A parametric demand curve λ(p).

    Closed forms (before scaling):
        linear       a - b p
        quadratic    c - a p²
        exponential  exp(a - b p)
        logit        M0 exp(a - b p) / (1 + exp(a - b p))

    Attributes:
        family: Curve family
        params: Parameters in the order given by PARAM_NAMES
        scale: Multiplier applied to the whole curve (1 - ε models a
            deflated demand estimate)
        price_range: Optional (p_lo, p_hi); when set, the curve is checked
            to be positive and non-increasing there and evaluation outside
            it is rejected
    """
    family: DemandFamily
    params: Tuple[float, ...]
    scale: float = 1.0
    price_range: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "family", DemandFamily(self.family))
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        expected = PARAM_NAMES[self.family]
        if len(self.params) != len(expected):
            raise DomainError(
                f"{self.family.value} demand takes parameters {expected}, got {len(self.params)} values"
            )
        if self.scale <= 0:
            raise DomainError(f"Demand scale must be positive, got {self.scale}")
        if self.price_range is not None:
            lo, hi = (float(v) for v in self.price_range)
            if not lo < hi:
                raise DomainError(f"Empty price interval [{lo}, {hi}]")
            object.__setattr__(self, "price_range", (lo, hi))
            self._check_shape(lo, hi)

    @classmethod
    def linear(cls, a: float, b: float, **kwargs) -> "DemandModel":
        return cls(DemandFamily.LINEAR, (a, b), **kwargs)

    @classmethod
    def quadratic(cls, c: float, a: float, **kwargs) -> "DemandModel":
        return cls(DemandFamily.QUADRATIC, (c, a), **kwargs)

    @classmethod
    def exponential(cls, a: float, b: float, **kwargs) -> "DemandModel":
        return cls(DemandFamily.EXPONENTIAL, (a, b), **kwargs)

    @classmethod
    def logit(cls, m0: float, a: float, b: float, **kwargs) -> "DemandModel":
        return cls(DemandFamily.LOGIT, (m0, a, b), **kwargs)

    def _check_shape(self, lo: float, hi: float) -> None:
        grid = np.linspace(lo, hi, 201)
        if np.any(self.rate(grid) <= 0):
            raise DomainError(f"Demand must be positive on [{lo}, {hi}]")
        if np.any(self.d1(grid) > 0):
            raise DomainError(f"Demand must be non-increasing on [{lo}, {hi}]")

    def with_scale(self, scale: float) -> "DemandModel":
        return replace(self, scale=scale)

    def with_price_range(self, lo: float, hi: float) -> "DemandModel":
        return replace(self, price_range=(lo, hi))

    @property
    def named_params(self) -> Dict[str, float]:
        return dict(zip(PARAM_NAMES[self.family], self.params))

    # ═══════════════════════════════════════════════════════════════════════
    # CURVE AND DERIVATIVES (unchecked, vectorized)
    # ═══════════════════════════════════════════════════════════════════════

    def rate(self, p):
        """λ(p)."""
        p = np.asarray(p, dtype=float)
        f = self.family
        if f == DemandFamily.LINEAR:
            a, b = self.params
            value = a - b * p
        elif f == DemandFamily.QUADRATIC:
            c, a = self.params
            value = c - a * p**2
        elif f == DemandFamily.EXPONENTIAL:
            a, b = self.params
            value = np.exp(a - b * p)
        else:
            m0, a, b = self.params
            value = m0 * expit(a - b * p)
        return self.scale * value

    def d1(self, p):
        """λ'(p)."""
        p = np.asarray(p, dtype=float)
        f = self.family
        if f == DemandFamily.LINEAR:
            value = -self.params[1] * np.ones_like(p)
        elif f == DemandFamily.QUADRATIC:
            value = -2.0 * self.params[1] * p
        elif f == DemandFamily.EXPONENTIAL:
            a, b = self.params
            value = -b * np.exp(a - b * p)
        else:
            m0, a, b = self.params
            s = expit(a - b * p)
            value = -b * m0 * s * (1.0 - s)
        return self.scale * value

    def d2(self, p):
        """λ''(p)."""
        p = np.asarray(p, dtype=float)
        f = self.family
        if f == DemandFamily.LINEAR:
            value = np.zeros_like(p)
        elif f == DemandFamily.QUADRATIC:
            value = -2.0 * self.params[1] * np.ones_like(p)
        elif f == DemandFamily.EXPONENTIAL:
            a, b = self.params
            value = b**2 * np.exp(a - b * p)
        else:
            m0, a, b = self.params
            s = expit(a - b * p)
            value = b**2 * m0 * s * (1.0 - s) * (1.0 - 2.0 * s)
        return self.scale * value

    def check_price(self, p) -> None:
        """Reject prices outside the configured interval."""
        if self.price_range is None:
            return
        lo, hi = self.price_range
        p = np.asarray(p, dtype=float)
        if np.any(p < lo - _PRICE_TOLERANCE) or np.any(p > hi + _PRICE_TOLERANCE):
            raise DomainError(f"Price {p} outside the feasible interval [{lo}, {hi}]")

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"family": self.family.value, "params": self.named_params}
        if self.scale != 1.0:
            data["scale"] = self.scale
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], key: str = "demand") -> "DemandModel":
        if not isinstance(data, dict):
            raise ConfigError(key, "expected a mapping with 'family' and 'params'")
        for name in data:
            if name not in ("family", "params", "scale"):
                raise ConfigError(f"{key}.{name}", "unknown key")
        try:
            family = DemandFamily(data.get("family"))
        except ValueError:
            choices = ", ".join(f.value for f in DemandFamily)
            raise ConfigError(f"{key}.family", f"unknown family {data.get('family')!r}; choose from {choices}")

        params = data.get("params")
        names = PARAM_NAMES[family]
        if not isinstance(params, dict):
            raise ConfigError(f"{key}.params", f"expected a mapping of {names}")
        for name in params:
            if name not in names:
                raise ConfigError(f"{key}.params.{name}", f"not a {family.value} parameter")
        values = []
        for name in names:
            if name not in params:
                raise ConfigError(f"{key}.params.{name}", "missing parameter")
            values.append(_as_float(params[name], f"{key}.params.{name}"))
        scale = _as_float(data.get("scale", 1.0), f"{key}.scale")
        try:
            return cls(family, tuple(values), scale=scale)
        except DomainError as e:
            raise ConfigError(key, str(e))


def eval(model: DemandModel, p):  # noqa: A001 - public operation name
    """λ(p), rejecting prices outside the model's interval."""
    model.check_price(p)
    return model.rate(p)


def eval_d1(model: DemandModel, p):
    """λ'(p), rejecting prices outside the model's interval."""
    model.check_price(p)
    return model.d1(p)


def eval_d2(model: DemandModel, p):
    """λ''(p), rejecting prices outside the model's interval."""
    model.check_price(p)
    return model.d2(p)


# ═══════════════════════════════════════════════════════════════════════════════
# FEASIBLE BOX
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class FeasibleBox:
    """Axis-aligned decision box [mu_lo, mu_hi] × [p_lo, p_hi]."""
    mu_lo: float
    mu_hi: float
    p_lo: float
    p_hi: float

    def __post_init__(self):
        if not self.mu_lo < self.mu_hi:
            raise DomainError(f"Empty capacity interval [{self.mu_lo}, {self.mu_hi}]")
        if not self.p_lo < self.p_hi:
            raise DomainError(f"Empty price interval [{self.p_lo}, {self.p_hi}]")
        if self.mu_lo <= 0:
            raise DomainError(f"Service rates must be positive, got mu_lo={self.mu_lo}")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.mu_lo, self.p_lo])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.mu_hi, self.p_hi])

    @property
    def bounds(self) -> list:
        """Bounds in the (lo, hi) pair form scipy.optimize expects."""
        return [(self.mu_lo, self.mu_hi), (self.p_lo, self.p_hi)]

    def midpoint(self) -> Tuple[float, float]:
        return 0.5 * (self.mu_lo + self.mu_hi), 0.5 * (self.p_lo + self.p_hi)

    def contains(self, mu: float, p: float) -> bool:
        return self.mu_lo <= mu <= self.mu_hi and self.p_lo <= p <= self.p_hi

    def clip(self, x) -> np.ndarray:
        """Euclidean projection onto the box (coordinate-wise clamp)."""
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def mesh(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """An n×n (mu, p) mesh covering the box, endpoints included."""
        mu = np.linspace(self.mu_lo, self.mu_hi, n)
        p = np.linspace(self.p_lo, self.p_hi, n)
        return np.meshgrid(mu, p, indexing="ij")

    def is_stable(self, demand: DemandModel) -> bool:
        """Uniform stability: λ(p_lo) < mu_lo, so every policy in the box is stable."""
        return bool(demand.rate(self.p_lo) < self.mu_lo)

    def require_stable(self, demand: DemandModel) -> None:
        if not self.is_stable(demand):
            raise UnstablePolicyError(
                float(demand.rate(self.p_lo)), self.mu_lo,
                context="box corner (mu_lo, p_lo) is not uniformly stable",
            )

    def to_dict(self) -> Dict[str, float]:
        return {"mu_lo": self.mu_lo, "mu_hi": self.mu_hi, "p_lo": self.p_lo, "p_hi": self.p_hi}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], key: str = "box") -> "FeasibleBox":
        if not isinstance(data, dict):
            raise ConfigError(key, "expected a mapping with mu_lo, mu_hi, p_lo, p_hi")
        names = ("mu_lo", "mu_hi", "p_lo", "p_hi")
        for name in data:
            if name not in names:
                raise ConfigError(f"{key}.{name}", "unknown key")
        values = {}
        for name in names:
            if name not in data:
                raise ConfigError(f"{key}.{name}", "missing bound")
            values[name] = _as_float(data[name], f"{key}.{name}")
        try:
            return cls(**values)
        except DomainError as e:
            raise ConfigError(key, str(e))


# ═══════════════════════════════════════════════════════════════════════════════
# STAFFING COST
# ═══════════════════════════════════════════════════════════════════════════════

class CostForm(str, Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class StaffingCost:
    """
    Capacity cost rate c(μ).

    ``linear`` is c0 μ; ``quadratic`` is c0 μ + c2 μ² (c2 ≥ 0 keeps it convex).
    """
    form: CostForm = CostForm.LINEAR
    c0: float = 1.0
    c2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "form", CostForm(self.form))
        if self.c0 < 0 or self.c2 < 0:
            raise DomainError("Staffing cost coefficients must be non-negative")
        if self.form == CostForm.LINEAR and self.c2 != 0.0:
            raise DomainError("A linear staffing cost has no quadratic coefficient")

    @classmethod
    def linear(cls, c0: float = 1.0) -> "StaffingCost":
        return cls(CostForm.LINEAR, c0)

    def value(self, mu):
        mu = np.asarray(mu, dtype=float)
        return self.c0 * mu + self.c2 * mu**2

    def d1(self, mu):
        mu = np.asarray(mu, dtype=float)
        return self.c0 + 2.0 * self.c2 * mu

    def d2(self, mu):
        return 2.0 * self.c2 * np.ones_like(np.asarray(mu, dtype=float))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"form": self.form.value, "c0": self.c0}
        if self.form == CostForm.QUADRATIC:
            data["c2"] = self.c2
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], key: str = "cost") -> "StaffingCost":
        if not isinstance(data, dict):
            raise ConfigError(key, "expected a mapping with 'form' and 'c0'")
        for name in data:
            if name not in ("form", "c0", "c2"):
                raise ConfigError(f"{key}.{name}", "unknown key")
        try:
            form = CostForm(data.get("form", "linear"))
        except ValueError:
            raise ConfigError(f"{key}.form", f"unknown cost form {data.get('form')!r}")
        try:
            return cls(
                form,
                _as_float(data.get("c0", 1.0), f"{key}.c0"),
                _as_float(data.get("c2", 0.0), f"{key}.c2"),
            )
        except DomainError as e:
            raise ConfigError(key, str(e))


def _as_float(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)
