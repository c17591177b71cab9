"""
Experiment configuration.

An experiment is described by one JSON file. Loading validates every key
and raises ConfigError naming the dotted path of the first offending one.
Process-wide defaults (output directory, worker count, log level) come
from the environment, with a local ``.env`` file honoured.
"""

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from src.demand.models import DemandFamily, DemandModel, FeasibleBox, StaffingCost
from src.liquar.engine import ESTIMATORS
from src.liquar.schedule import HyperSchedule
from src.analytic.gim1 import HOLDING_BASES
from src.queue_sim.arrivals import ArrivalSpec
from src.queue_sim.trace import Policy
from src.stochastic.distributions import UnitDist
from src.system import QueueSystem
from src.utils.errors import ConfigError, DomainError, UnstablePolicyError

# Load environment variables
load_dotenv()

METHODS = ("liquar", "ppto")


# ═══════════════════════════════════════════════════════════════════════════════
# ENVIRONMENT SETTINGS
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass
class Settings:
    """Process-wide defaults; CLI flags override them."""
    output_dir: Path = Path("runs")
    jobs: int = 1
    log_level: str = "INFO"
    grid_points: int = 200


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(name, f"expected an integer, got {raw!r}")
    if value < 1:
        raise ConfigError(name, f"must be at least 1, got {value}")
    return value


def load_settings() -> Settings:
    """
    Read defaults from LIQUAR_OUTPUT_DIR, LIQUAR_JOBS, LIQUAR_LOG_LEVEL and
    LIQUAR_GRID_POINTS.
    """
    return Settings(
        output_dir=Path(os.getenv("LIQUAR_OUTPUT_DIR", "runs")),
        jobs=_env_int("LIQUAR_JOBS", 1),
        log_level=os.getenv("LIQUAR_LOG_LEVEL", "INFO").upper(),
        grid_points=_env_int("LIQUAR_GRID_POINTS", 200),
    )


# ═══════════════════════════════════════════════════════════════════════════════
# EXPERIMENT CONFIG
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class PtoSettings:
    """Settings of the predict-then-optimize baseline."""
    family: str = "logit"
    theta: float = 0.06
    m: int = 5
    explore_mu: Optional[float] = None
    total_time: Optional[float] = None
    opt_chunks: int = 20

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "family": self.family, "theta": self.theta, "m": self.m, "opt_chunks": self.opt_chunks,
        }
        if self.explore_mu is not None:
            data["explore_mu"] = self.explore_mu
        if self.total_time is not None:
            data["total_time"] = self.total_time
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], key: str = "pto") -> "PtoSettings":
        _require_mapping(data, key)
        _reject_unknown(data, key, cls.__dataclass_fields__)
        family = data.get("family", "logit")
        if family not in {f.value for f in DemandFamily}:
            raise ConfigError(f"{key}.family", f"unknown demand family {family!r}")
        theta = _number(data.get("theta", 0.06), f"{key}.theta")
        if not 0.0 < theta < 1.0:
            raise ConfigError(f"{key}.theta", f"exploration ratio must lie in (0, 1), got {theta}")
        explore_mu = data.get("explore_mu")
        total_time = data.get("total_time")
        return cls(
            family=family,
            theta=theta,
            m=_integer(data.get("m", 5), f"{key}.m"),
            explore_mu=None if explore_mu is None else _number(explore_mu, f"{key}.explore_mu"),
            total_time=None if total_time is None else _number(total_time, f"{key}.total_time"),
            opt_chunks=_integer(data.get("opt_chunks", 20), f"{key}.opt_chunks"),
        )


@dataclass(frozen=True)
class OutputSettings:
    svg: bool = False
    trace_dump: bool = False

    def to_dict(self) -> Dict[str, bool]:
        return {"svg": self.svg, "trace_dump": self.trace_dump}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], key: str = "output") -> "OutputSettings":
        _require_mapping(data, key)
        _reject_unknown(data, key, cls.__dataclass_fields__)
        values = {}
        for name in ("svg", "trace_dump"):
            if name in data:
                if not isinstance(data[name], bool):
                    raise ConfigError(f"{key}.{name}", f"expected true or false, got {data[name]!r}")
                values[name] = data[name]
        return cls(**values)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything needed to reproduce one experiment.

    ``enforce_stability`` rejects boxes that are not uniformly stable; turn
    it off for heavy-traffic settings whose optimum lies too close to the
    stability boundary for any such box to contain it.
    """
    label: str
    demand: DemandModel
    cost: StaffingCost
    h0: float
    box: FeasibleBox
    schedule: HyperSchedule = field(default_factory=HyperSchedule)
    initial: Policy = field(default_factory=lambda: Policy(10.0, 5.0))
    method: str = "liquar"
    service: UnitDist = field(default_factory=UnitDist.exponential)
    arrivals: ArrivalSpec = field(default_factory=ArrivalSpec.poisson)
    estimator: str = "trimmed"
    holding_basis: str = "arrival"
    enforce_stability: bool = True
    pto: Optional[PtoSettings] = None
    replications: int = 10
    output: OutputSettings = field(default_factory=OutputSettings)

    def validate(self) -> "ExperimentConfig":
        """
        Check cross-field consistency.

        Raises:
            ConfigError: Naming the offending key
        """
        if not self.label:
            raise ConfigError("label", "must be a non-empty string")
        if self.method not in METHODS:
            raise ConfigError("method", f"must be one of {METHODS}, got {self.method!r}")
        if self.method == "ppto" and self.pto is None:
            raise ConfigError("pto", "method 'ppto' needs a 'pto' section")
        if self.estimator not in ESTIMATORS:
            raise ConfigError("estimator", f"must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.holding_basis not in HOLDING_BASES:
            raise ConfigError("holding_basis", f"must be one of {HOLDING_BASES}, got {self.holding_basis!r}")
        if self.h0 <= 0:
            raise ConfigError("h0", f"holding cost must be positive, got {self.h0}")
        if self.replications < 1:
            raise ConfigError("replications", "must be at least 1")
        if not self.box.contains(self.initial.mu, self.initial.p):
            raise ConfigError("initial", f"({self.initial.mu}, {self.initial.p}) lies outside the box")
        if self.enforce_stability:
            try:
                self.box.require_stable(self.demand)
            except UnstablePolicyError as e:
                raise ConfigError("box", f"{e}\nSet enforce_stability to false to allow this box.")
        try:
            self.demand.with_price_range(self.box.p_lo, self.box.p_hi)
        except DomainError as e:
            raise ConfigError("demand", str(e))
        self.system().objective()
        return self

    def system(self) -> QueueSystem:
        return QueueSystem(
            demand=self.demand, cost=self.cost, h0=self.h0, box=self.box,
            service=self.service, arrivals=self.arrivals, holding_basis=self.holding_basis,
        )

    def horizon(self) -> float:
        """Total operating time: the pPTO horizon or 2 Σ T_k."""
        if self.method == "ppto" and self.pto and self.pto.total_time is not None:
            return self.pto.total_time
        return self.schedule.total_time()

    def with_label(self, label: str) -> "ExperimentConfig":
        return replace(self, label=label)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "label": self.label,
            "method": self.method,
            "demand": self.demand.to_dict(),
            "cost": self.cost.to_dict(),
            "h0": self.h0,
            "service": self.service.to_dict(),
            "arrivals": self.arrivals.to_dict(),
            "box": self.box.to_dict(),
            "schedule": self.schedule.to_dict(),
            "initial": {"mu": self.initial.mu, "p": self.initial.p},
            "estimator": self.estimator,
            "holding_basis": self.holding_basis,
            "enforce_stability": self.enforce_stability,
            "replications": self.replications,
            "output": self.output.to_dict(),
        }
        if self.pto is not None:
            data["pto"] = self.pto.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        _require_mapping(data, "<config>")
        _reject_unknown(data, "", cls.__dataclass_fields__)
        for name in ("label", "demand", "cost", "h0", "box"):
            if name not in data:
                raise ConfigError(name, "required key is missing")
        if not isinstance(data["label"], str):
            raise ConfigError("label", "must be a string")

        kwargs: Dict[str, Any] = {
            "label": data["label"],
            "demand": DemandModel.from_dict(data["demand"]),
            "cost": StaffingCost.from_dict(data["cost"]),
            "h0": _number(data["h0"], "h0"),
            "box": FeasibleBox.from_dict(data["box"]),
        }
        if "schedule" in data:
            kwargs["schedule"] = HyperSchedule.from_dict(data["schedule"])
        if "initial" in data:
            initial = data["initial"]
            _require_mapping(initial, "initial")
            _reject_unknown(initial, "initial", {"mu": None, "p": None})
            kwargs["initial"] = Policy(
                _number(initial.get("mu"), "initial.mu"), _number(initial.get("p"), "initial.p")
            )
        if "service" in data:
            kwargs["service"] = UnitDist.from_dict(data["service"], "service")
        if "arrivals" in data:
            kwargs["arrivals"] = ArrivalSpec.from_dict(data["arrivals"])
        if "pto" in data:
            kwargs["pto"] = PtoSettings.from_dict(data["pto"])
        if "output" in data:
            kwargs["output"] = OutputSettings.from_dict(data["output"])
        for name in ("method", "estimator", "holding_basis"):
            if name in data:
                if not isinstance(data[name], str):
                    raise ConfigError(name, "must be a string")
                kwargs[name] = data[name]
        if "enforce_stability" in data:
            if not isinstance(data["enforce_stability"], bool):
                raise ConfigError("enforce_stability", "expected true or false")
            kwargs["enforce_stability"] = data["enforce_stability"]
        if "replications" in data:
            kwargs["replications"] = _integer(data["replications"], "replications")
        return cls(**kwargs).validate()


def load_config(path: Path | str) -> ExperimentConfig:
    """
    Read and validate an experiment file.

    Raises:
        FileNotFoundError: If ``path`` does not exist
        ConfigError: If the file is not valid JSON or fails validation
    """
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"not valid JSON: {e}")
    return ExperimentConfig.from_dict(data)


def save_config(config: ExperimentConfig, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config.to_dict(), indent=2) + "\n")
    return path


# ═══════════════════════════════════════════════════════════════════════════════
# VALIDATION HELPERS
# ═══════════════════════════════════════════════════════════════════════════════

def _require_mapping(data: Any, key: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(key, f"expected a mapping, got {type(data).__name__}")


def _reject_unknown(data: Dict[str, Any], prefix: str, known) -> None:
    for name in data:
        if name not in known:
            path = f"{prefix}.{name}" if prefix else name
            raise ConfigError(path, f"unknown key; expected one of {sorted(known)}")


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return value
