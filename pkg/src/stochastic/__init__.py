"""Unit-mean distributions and reproducible random streams."""

from src.stochastic.distributions import (
    DistFamily,
    UnitDist,
    hyperexp_from_scv,
    sample,
    service_for_scv,
)
from src.stochastic.streams import Purpose, RngStream, cycle_stream

__all__ = [
    "DistFamily",
    "UnitDist",
    "hyperexp_from_scv",
    "sample",
    "service_for_scv",
    "Purpose",
    "RngStream",
    "cycle_stream",
]
