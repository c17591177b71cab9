"""Least-squares fitting of parametric demand curves from (price, rate) samples."""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from src.demand.models import PARAM_NAMES, DemandFamily, DemandModel
from src.utils.console import get_logger
from src.utils.errors import DomainError, FitError

logger = get_logger(__name__)

TOLERANCE = 1e-10
MAX_ITERATIONS = 200


@dataclass
class FitResult:
    """
    Outcome of a least-squares demand fit.

    Attributes:
        family: Fitted family
        params: Best parameters found
        residual: Sum of squared residuals at ``params``
        converged: False when the evaluation limit was hit before the
            tolerances were met
        iterations: Residual evaluations used (0 for closed forms; with the
            analytic Jacobian this is one per iteration)
    """
    family: DemandFamily
    params: Tuple[float, ...]
    residual: float
    converged: bool = True
    iterations: int = 0

    def model(self, **kwargs) -> DemandModel:
        return DemandModel(self.family, self.params, **kwargs)


def _residuals(family: DemandFamily, params: np.ndarray, p: np.ndarray, y: np.ndarray) -> np.ndarray:
    return DemandModel(family, tuple(params)).rate(p) - y


def _jacobian(family: DemandFamily, params: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Partial derivatives of λ(p; β) with respect to β, one row per sample."""
    if family == DemandFamily.EXPONENTIAL:
        a, b = params
        e = np.exp(a - b * p)
        return np.column_stack([e, -p * e])
    if family == DemandFamily.LOGIT:
        m0, a, b = params
        u = a - b * p
        s = 1.0 / (1.0 + np.exp(-u))
        ds = m0 * s * (1.0 - s)
        return np.column_stack([s, ds, -p * ds])
    raise DomainError(f"No iterative fit for the {family.value} family")


def _initial_guess(family: DemandFamily, p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Log-linearized starting point (log-odds for the logit family)."""
    if np.any(y <= 0):
        positive = y > 0
        if positive.sum() < 2:
            raise FitError(f"Need at least two positive rates to initialize a {family.value} fit")
        p, y = p[positive], y[positive]

    if family == DemandFamily.EXPONENTIAL:
        design = np.column_stack([np.ones_like(p), -p])
        coef, *_ = np.linalg.lstsq(design, np.log(y), rcond=None)
        return coef

    m0 = 1.25 * float(np.max(y))
    design = np.column_stack([np.ones_like(p), -p])
    coef, *_ = np.linalg.lstsq(design, np.log(y / (m0 - y)), rcond=None)
    return np.array([m0, coef[0], coef[1]])


def _solve_iterative(
    family: DemandFamily,
    p: np.ndarray,
    y: np.ndarray,
    start: np.ndarray,
) -> FitResult:
    result = least_squares(
        lambda beta: _residuals(family, beta, p, y),
        np.asarray(start, dtype=float),
        jac=lambda beta: _jacobian(family, beta, p),
        method="lm",
        x_scale="jac",
        xtol=TOLERANCE,
        ftol=TOLERANCE,
        gtol=TOLERANCE,
        max_nfev=MAX_ITERATIONS,
    )
    if not np.all(np.isfinite(result.x)):
        raise FitError(f"{family.value} fit diverged from {tuple(start)}", result=result)
    sse = float(result.fun @ result.fun)
    if not result.success:
        logger.warning(f"{family.value} fit stopped after {result.nfev} evaluations (SSE {sse:.3g}): {result.message}")
    return FitResult(family, tuple(float(v) for v in result.x), sse, bool(result.success), int(result.nfev))


def fit_least_squares(
    family: DemandFamily | str,
    samples: Sequence[Tuple[float, float]],
    init: Optional[Sequence[float]] = None,
) -> FitResult:
    """
    Fit λ(p; β) to observed (price, rate) pairs by least squares.

    Linear and quadratic families are solved in closed form; exponential and
    logit curves are fitted by damped Gauss–Newton (MINPACK Levenberg–Marquardt),
    started from ``init`` or from a log-linearization of the data.

    Args:
        family: Demand family to fit
        samples: (price, observed rate) pairs
        init: Optional starting parameters for iterative fits

    Returns:
        FitResult; ``converged`` is False if the iteration did not settle

    Raises:
        DomainError: Too few samples or repeated prices
    """
    family = DemandFamily(family)
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise DomainError("Samples must be (price, rate) pairs")
    p, y = data[:, 0], data[:, 1]

    n_params = len(PARAM_NAMES[family])
    if len(p) < n_params:
        raise DomainError(
            f"A {family.value} fit needs at least {n_params} samples, got {len(p)}"
        )
    if len(np.unique(p)) != len(p):
        raise DomainError("Sample prices must be distinct")

    if family in (DemandFamily.LINEAR, DemandFamily.QUADRATIC):
        regressor = -p if family == DemandFamily.LINEAR else -(p**2)
        design = np.column_stack([np.ones_like(p), regressor])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        r = design @ coef - y
        return FitResult(family, tuple(float(v) for v in coef), float(r @ r))

    start = np.asarray(init, dtype=float) if init is not None else _initial_guess(family, p, y)
    return _solve_iterative(family, p, y, start)


def sup_norm_error(fitted: DemandModel, truth: DemandModel, p_lo: float, p_hi: float, n: int = 501) -> float:
    """Maximum |λ̂(p) - λ(p)| over a price interval."""
    grid = np.linspace(p_lo, p_hi, n)
    return float(np.max(np.abs(fitted.rate(grid) - truth.rate(grid))))
