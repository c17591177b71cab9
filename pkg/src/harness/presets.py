"""
Named experiment presets.

Every preset exists at full scale and as a ``-desk`` variant with a
shorter schedule (L = 300, T_k = 50 k^(1/3), η_k = 1/k) and 10
replications. The ±δe_i pair makes the realized step on coordinate i
4η_k ∂_i f, so the desk step is 4/k per unit gradient. A preset name maps to
a list of configs; single-setting presets return a list of one.
"""

from dataclasses import replace
from typing import Callable, Dict, List, Tuple

from src.demand.models import DemandModel, FeasibleBox, StaffingCost
from src.liquar.schedule import HyperSchedule
from src.queue_sim.arrivals import ArrivalSpec
from src.queue_sim.trace import Policy
from src.stochastic.distributions import UnitDist, service_for_scv
from src.utils.config import ExperimentConfig, PtoSettings
from src.utils.errors import ConfigError

BASE_DEMAND = DemandModel.logit(10.0, 4.1, 1.0)
BASE_COST = StaffingCost.linear(1.0)
BASE_BOX = FeasibleBox(mu_lo=6.5, mu_hi=10.0, p_lo=3.5, p_hi=7.0)
# Near-critical settings. A uniformly stable box (λ(p_lo) < μ_lo) that
# contains x* has its lower corner within a few hundredths of x*; each
# corner here is x* rounded down.
HEAVY_BOXES: Dict[Tuple[float, float], FeasibleBox] = {
    (0.001, 0.5): FeasibleBox(mu_lo=6.23, mu_hi=10.0, p_lo=3.62, p_hi=7.0),
    (0.001, 1.0): FeasibleBox(mu_lo=6.24, mu_hi=10.0, p_lo=3.62, p_hi=7.0),
    (0.001, 5.0): FeasibleBox(mu_lo=6.29, mu_hi=10.0, p_lo=3.62, p_hi=7.0),
    (0.02, 0.5): FeasibleBox(mu_lo=6.43, mu_hi=10.0, p_lo=3.63, p_hi=7.0),
    (0.02, 1.0): FeasibleBox(mu_lo=6.47, mu_hi=10.0, p_lo=3.63, p_hi=7.0),
    (0.02, 5.0): FeasibleBox(mu_lo=6.68, mu_hi=10.0, p_lo=3.65, p_hi=7.0),
}
SENSITIVITY_BOX = FeasibleBox(mu_lo=5.0, mu_hi=12.0, p_lo=3.0, p_hi=8.0)

LIGHT_H0 = 1.0
HEAVY_H0 = 0.001
HEAVY_BOX = HEAVY_BOXES[(HEAVY_H0, 1.0)]
STEP_SCALES = (0.6, 1.0, 1.2)
CYCLE_CONSTANTS = (40.0, 200.0, 360.0)
PTO_THETAS = (0.003, 0.009, 0.015, 0.06, 0.15)
PTO_PRICES = 5
ROBUSTNESS_H0 = (0.001, 0.02, 1.0)
ROBUSTNESS_SCV = (0.5, 1.0, 5.0)

FULL_REPLICATIONS = 100
DESK_REPLICATIONS = 10
DESK_L = 300
DESK_CYCLE_CONSTANT = 50.0
DESK_STEP_CONSTANT = 1.0
DESK_SUFFIX = "-desk"


def _schedule(desk: bool) -> HyperSchedule:
    if desk:
        return HyperSchedule(c_eta=DESK_STEP_CONSTANT, c_T=DESK_CYCLE_CONSTANT, L=DESK_L)
    return HyperSchedule()


def _config(label: str, desk: bool, **overrides) -> ExperimentConfig:
    fields = {
        "label": label + (DESK_SUFFIX if desk else ""),
        "demand": BASE_DEMAND,
        "cost": BASE_COST,
        "h0": LIGHT_H0,
        "box": BASE_BOX,
        "schedule": _schedule(desk),
        "initial": Policy(10.0, 5.0),
        "replications": DESK_REPLICATIONS if desk else FULL_REPLICATIONS,
    }
    fields.update(overrides)
    return ExperimentConfig(**fields).validate()


# ═══════════════════════════════════════════════════════════════════════════════
# PRESET FAMILIES
# ═══════════════════════════════════════════════════════════════════════════════

def base_presets(desk: bool) -> List[ExperimentConfig]:
    """Logit demand, h0 = 1, c(μ) = μ, M/M/1, start at (10, 5)."""
    return [_config("base", desk)]


def step_sweep_presets(desk: bool) -> List[ExperimentConfig]:
    """η_k and δ_k constants scaled by c ∈ {0.6, 1, 1.2}."""
    return [
        _config(f"step-c{c:g}", desk, schedule=_schedule(desk).scaled(c))
        for c in STEP_SCALES
    ]


def cycle_sweep_presets(desk: bool) -> List[ExperimentConfig]:
    """
    T_k constant T ∈ {40, 200, 360} with L = ⌈1000 (200/T)^(3/4)⌉.

    The desk variant divides every T by 4 and scales L from 300 the same way.
    """
    configs = []
    for c_T in CYCLE_CONSTANTS:
        if desk:
            schedule = _schedule(True).with_cycle_constant(c_T / 4.0, base_T=DESK_CYCLE_CONSTANT, base_L=DESK_L)
        else:
            schedule = HyperSchedule().with_cycle_constant(c_T)
        configs.append(_config(f"cycle-T{c_T:g}", desk, schedule=schedule))
    return configs


def _pto_presets(name: str, h0: float, box: FeasibleBox, desk: bool) -> List[ExperimentConfig]:
    learner = _config(f"{name}-liquar", desk, h0=h0, box=box, initial=Policy(10.0, 7.0))
    horizon = learner.schedule.total_time()
    baselines = [
        replace(
            learner,
            label=f"{name}-ppto-theta{theta:g}" + (DESK_SUFFIX if desk else ""),
            method="ppto",
            pto=PtoSettings(family="logit", theta=theta, m=PTO_PRICES, total_time=horizon),
        ).validate()
        for theta in PTO_THETAS
    ]
    return [learner] + baselines


def pto_light_presets(desk: bool) -> List[ExperimentConfig]:
    """LiQUAR from (10, 7) against pPTO at five exploration ratios, h0 = 1."""
    return _pto_presets("pto-light", LIGHT_H0, BASE_BOX, desk)


def pto_heavy_presets(desk: bool) -> List[ExperimentConfig]:
    """The same comparison at h0 = 0.001, where ρ* ≈ 0.987, on HEAVY_BOX."""
    return _pto_presets("pto-heavy", HEAVY_H0, HEAVY_BOX, desk)


def e2m1_presets(desk: bool) -> List[ExperimentConfig]:
    """Erlang-2 renewal arrivals with exponential service."""
    return [_config("e2m1", desk, arrivals=ArrivalSpec.renewal(UnitDist.erlang(2)))]


def robustness_presets(desk: bool) -> List[ExperimentConfig]:
    """3 holding costs × 3 service SCVs."""
    configs = []
    for h0 in ROBUSTNESS_H0:
        for scv in ROBUSTNESS_SCV:
            configs.append(_config(
                f"robustness-h0{h0:g}-scv{scv:g}", desk,
                h0=h0, service=service_for_scv(scv),
                box=HEAVY_BOXES.get((h0, scv), BASE_BOX),
            ))
    return configs


PRESET_FAMILIES: Dict[str, Callable[[bool], List[ExperimentConfig]]] = {
    "base-6.1": base_presets,
    "step-sweep-6.2.1": step_sweep_presets,
    "cycle-sweep-6.2.2": cycle_sweep_presets,
    "pto-light-6.3": pto_light_presets,
    "pto-heavy-6.3": pto_heavy_presets,
    "e2m1-6.4": e2m1_presets,
    "robustness-C": robustness_presets,
}


def preset_names() -> List[str]:
    """All preset names, full scale first then desk scale."""
    return list(PRESET_FAMILIES) + [name + DESK_SUFFIX for name in PRESET_FAMILIES]


def preset(name: str) -> List[ExperimentConfig]:
    """
    Configs of a named preset.

    Raises:
        ConfigError: If ``name`` is unknown; the message lists the alternatives
    """
    desk = name.endswith(DESK_SUFFIX)
    family = name[: -len(DESK_SUFFIX)] if desk else name
    if family not in PRESET_FAMILIES:
        raise ConfigError("preset", f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return PRESET_FAMILIES[family](desk)


def single_preset(name: str) -> ExperimentConfig:
    """The config of a one-setting preset."""
    configs = preset(name)
    if len(configs) != 1:
        labels = ", ".join(c.label for c in configs)
        raise ConfigError("preset", f"{name!r} holds {len(configs)} configs ({labels}); pick one by label")
    return configs[0]


def find_config(name: str, label: str | None = None) -> ExperimentConfig:
    """A preset config, selected by label when the preset holds several."""
    if label is None:
        return single_preset(name)
    for config in preset(name):
        if config.label == label:
            return config
    raise ConfigError("label", f"preset {name!r} has no config labelled {label!r}")
