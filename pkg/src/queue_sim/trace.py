"""
Piecewise-linear workload paths.

A cycle is stored as a sequence of segments. Segment j starts at
``seg_start[j]`` (0 or an arrival epoch) at level ``seg_level[j]`` (the
workload just after the jump) and drains at slope -μ until it either hits
zero, after which the server idles, or the next segment begins. All
integrals are evaluated in closed form per segment.
"""

from dataclasses import dataclass, field
from typing import Any, List, Optional, Tuple

import numpy as np

from src.utils.errors import DomainError

_TIME_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Policy:
    """A control pair: service rate ``mu`` (work units per time) and price ``p``."""
    mu: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "p", float(self.p))
        if self.mu <= 0:
            raise DomainError(f"Service rate must be positive, got {self.mu}")

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.p])

    @classmethod
    def from_array(cls, x) -> "Policy":
        return cls(float(x[0]), float(x[1]))

    def distance(self, other: "Policy") -> float:
        return float(np.hypot(self.mu - other.mu, self.p - other.p))


@dataclass(frozen=True, eq=False)
class CycleTrace:
    """
    Complete record of one operating cycle under a constant policy.

    Attributes:
        policy: Policy in force during the cycle
        duration: Cycle length T
        w0: Workload at time 0
        arrival_times: Sorted arrival epochs in [0, T)
        jobs: Individual workloads V, aligned with ``arrival_times``
        seg_start: Segment start times, ``[0, arrival_times...]``
        seg_level: Workload just after each segment starts
        w_end: Workload at time T
        arrival_state: Arrival-process state at time T (for chaining)
    """
    policy: Policy
    duration: float
    w0: float
    arrival_times: np.ndarray
    jobs: np.ndarray
    seg_start: np.ndarray
    seg_level: np.ndarray
    w_end: float
    arrival_state: Optional[Any] = field(default=None, compare=False)

    @property
    def n_arrivals(self) -> int:
        return int(len(self.arrival_times))

    @property
    def mu(self) -> float:
        return self.policy.mu

    @property
    def seg_end(self) -> np.ndarray:
        return np.append(self.seg_start[1:], self.duration)

    @property
    def arrivals(self) -> List[Tuple[float, float]]:
        return list(zip(self.arrival_times.tolist(), self.jobs.tolist()))

    def breakpoints(self) -> List[Tuple[float, float, str]]:
        """
        Kinks of W(t) as ``(t, W, event)`` rows.

        Events are ``start``, ``idle`` (path reaches zero), ``pre_arrival``
        (left limit at an arrival), ``arrival`` (level after the jump) and
        ``end``.
        """
        mu = self.mu
        rows: List[Tuple[float, float, str]] = [(0.0, self.w0, "start")]
        for j, (start, level, end) in enumerate(zip(self.seg_start, self.seg_level, self.seg_end)):
            if j > 0:
                rows.append((float(start), float(level), "arrival"))
            empty_at = start + level / mu
            if level > 0 and empty_at < end:
                rows.append((float(empty_at), 0.0, "idle"))
            if j + 1 < len(self.seg_start):
                rows.append((float(end), float(max(level - mu * (end - start), 0.0)), "pre_arrival"))
        rows.append((self.duration, self.w_end, "end"))
        return rows


def build_trace(
    w0: float,
    policy: Policy,
    duration: float,
    arrival_times,
    jobs,
    arrival_state: Optional[Any] = None,
) -> CycleTrace:
    """
    Construct the exact workload path for given arrivals.

    The path follows W(t) = R(t) - min(0, inf_{s≤t} R(s)) with
    R(t) = w0 + J(t) - μt, where J is the cumulative arrived work. The
    running infimum of R is attained just before jumps, so it is evaluated
    on pre-jump values only.

    Args:
        w0: Initial workload (≥ 0)
        policy: Policy for the cycle
        duration: Cycle length (> 0)
        arrival_times: Arrival epochs in [0, duration), sorted
        jobs: Individual workloads, one per arrival

    Returns:
        CycleTrace
    """
    if duration <= 0:
        raise DomainError(f"Cycle duration must be positive, got {duration}")
    if w0 < 0:
        raise DomainError(f"Initial workload must be non-negative, got {w0}")

    times = np.asarray(arrival_times, dtype=float)
    work = np.asarray(jobs, dtype=float)
    if times.shape != work.shape:
        raise DomainError("Each arrival needs exactly one individual workload")
    if times.size and (np.any(np.diff(times) < 0) or times[0] < 0 or times[-1] >= duration):
        raise DomainError("Arrival epochs must be sorted and lie in [0, duration)")

    mu = policy.mu
    cum_work = np.cumsum(work)
    pre_jump = w0 + (cum_work - work) - mu * times
    running_min = np.minimum(np.minimum.accumulate(pre_jump), 0.0) if times.size else pre_jump
    post_jump = w0 + cum_work - mu * times - running_min
    # levels after a jump are at least the arriving job
    post_jump = np.maximum(post_jump, work)

    seg_start = np.concatenate([[0.0], times])
    seg_level = np.concatenate([[float(w0)], post_jump])
    w_end = max(float(seg_level[-1]) - mu * (duration - float(seg_start[-1])), 0.0)

    return CycleTrace(
        policy=policy,
        duration=float(duration),
        w0=float(w0),
        arrival_times=times,
        jobs=work,
        seg_start=seg_start,
        seg_level=seg_level,
        w_end=w_end,
        arrival_state=arrival_state,
    )


# ═══════════════════════════════════════════════════════════════════════════════
# PATH QUERIES
# ═══════════════════════════════════════════════════════════════════════════════

def _check_interval(trace: CycleTrace, t0: float, t1: float) -> None:
    if not (-_TIME_TOLERANCE <= t0 <= t1 <= trace.duration + _TIME_TOLERANCE):
        raise DomainError(
            f"Integration window [{t0}, {t1}] must satisfy 0 <= t0 <= t1 <= {trace.duration}"
        )


def _segment_area(level: np.ndarray, mu: float, x) -> np.ndarray:
    """∫_0^x of a segment that starts at ``level`` and drains at ``mu``."""
    drained = np.minimum(x, level / mu)
    return level * drained - 0.5 * mu * drained**2


def _windowed_area(trace: CycleTrace, t0: float, t1: float, mask: Optional[np.ndarray] = None) -> float:
    start, end, level = trace.seg_start, trace.seg_end, trace.seg_level
    lo = np.clip(t0, start, end) - start
    hi = np.clip(t1, start, end) - start
    areas = _segment_area(level, trace.mu, hi) - _segment_area(level, trace.mu, lo)
    if mask is not None:
        areas = np.where(mask, areas, 0.0)
    return float(np.sum(areas))


def workload_at(trace: CycleTrace, t: float) -> float:
    """W(t), right-continuous at arrival epochs."""
    if not (-_TIME_TOLERANCE <= t <= trace.duration + _TIME_TOLERANCE):
        raise DomainError(f"Time {t} outside [0, {trace.duration}]")
    j = int(np.searchsorted(trace.seg_start, t, side="right")) - 1
    j = max(j, 0)
    return max(float(trace.seg_level[j]) - trace.mu * (t - float(trace.seg_start[j])), 0.0)


def workload_integral(trace: CycleTrace, t0: float, t1: float) -> float:
    """Exact ∫_{t0}^{t1} W(t) dt."""
    _check_interval(trace, t0, t1)
    return _windowed_area(trace, t0, t1)


def observed_segments(trace: CycleTrace) -> np.ndarray:
    """
    Per-segment recoverability flags.

    While a segment drains, W(t) - μ(T - t) is constant, so the censoring
    condition W(t) ≤ μ(T - t) holds on the whole busy part of a segment or
    on none of it.
    """
    return trace.seg_level <= trace.mu * (trace.duration - trace.seg_start)


def observed_workload(trace: CycleTrace, t: float) -> float:
    """Ŵ(t): W(t) when it can be recovered by the end of the cycle, else 0."""
    w = workload_at(trace, t)
    return w if w <= trace.mu * (trace.duration - t) else 0.0


def observed_workload_integral(trace: CycleTrace, t0: float, t1: float) -> float:
    """Exact ∫_{t0}^{t1} Ŵ(t) dt."""
    _check_interval(trace, t0, t1)
    return _windowed_area(trace, t0, t1, mask=observed_segments(trace))


def busy_time(trace: CycleTrace) -> float:
    """Total time in [0, T] with W > 0."""
    lengths = trace.seg_end - trace.seg_start
    return float(np.sum(np.minimum(lengths, trace.seg_level / trace.mu)))


def work_conservation_gap(trace: CycleTrace) -> float:
    """Relative violation of w0 + ΣV - w_end = μ·busy time."""
    inflow = trace.w0 + float(np.sum(trace.jobs))
    served = trace.mu * busy_time(trace)
    return abs(inflow - trace.w_end - served) / max(inflow, 1.0)
