"""Predict-then-optimize baseline and the misspecification study."""

from src.pto.ppto import LedgerEntry, PtoResult, run_ppto
from src.pto.sensitivity import (
    DEFAULT_H0_LIST,
    SensitivityRow,
    sensitivity_frame,
    sensitivity_misspecification,
)

__all__ = [
    "LedgerEntry",
    "PtoResult",
    "run_ppto",
    "DEFAULT_H0_LIST",
    "SensitivityRow",
    "sensitivity_frame",
    "sensitivity_misspecification",
]
