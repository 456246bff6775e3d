"""Aggregate statistics of a multi-agent deal pool in one window.

The aggregate variable is the total of K per-deal values drawn at random.
Scaling by the deal count K turns per-deal moments into aggregate moments:
the total is K times the per-deal mean, the aggregate variance is K² times
the per-deal variance — and the squared coefficient of variation of the
aggregate therefore equals that of a single deal. ``cv_transfer_check``
makes that identity a user-visible, testable quantity.

Agent labels are carried for lineage but never enter the statistics: every
sum flattens over all deals regardless of which agent made them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import EmptyWindowError, InvalidTickError, UndefinedCVError
from .ticks import WindowSpec

__all__ = [
    "Deal",
    "DealPool",
    "AggregateStats",
    "CvTransfer",
    "aggregate",
    "cv_transfer_check",
    "pool_from_arrays",
]


@dataclass(frozen=True)
class Deal:
    """One purchase: who, when, how much money."""

    agent: str
    time: float
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.time) and math.isfinite(self.value)):
            raise InvalidTickError(
                f"deal fields must be finite, got time={self.time}, value={self.value}"
            )


@dataclass(frozen=True)
class DealPool:
    """All deals of all agents inside one window."""

    deals: tuple[Deal, ...]
    window: WindowSpec

    def __post_init__(self):
        object.__setattr__(self, "deals", tuple(self.deals))
        if len(self.deals) == 0:
            raise EmptyWindowError("a deal pool must contain at least one deal")
        times = np.fromiter(
            (d.time for d in self.deals), dtype=np.float64, count=len(self.deals)
        )
        bad = np.flatnonzero((times < self.window.lo) | (times >= self.window.hi))
        if bad.size:
            raise InvalidTickError(
                f"deal at t={times[bad[0]]} lies outside window "
                f"[{self.window.lo}, {self.window.hi})"
            )

    def __len__(self) -> int:
        return len(self.deals)

    def values(self) -> np.ndarray:
        return np.fromiter(
            (d.value for d in self.deals), dtype=np.float64, count=len(self.deals)
        )


@dataclass(frozen=True)
class AggregateStats:
    """Per-deal and aggregate moments of one pool.

    ``agg_mean`` is the same number as ``total`` (the aggregate's mean *is*
    the conventional total), ``agg_volatility = k²·(deal_second −
    deal_mean²)``, and ``agg_cv_sq`` equals ``deal_cv_sq`` up to rounding —
    the K factors cancel. CV fields are NaN for zero-mean pools.
    """

    k: int
    deal_mean: float
    deal_second: float
    total: float
    total_second: float
    agg_mean: float
    agg_volatility: float
    agg_cv_sq: float
    deal_cv_sq: float


class CvTransfer(NamedTuple):
    agg_cv_sq: float
    deal_cv_sq: float
    gap: float


def aggregate(pool: DealPool) -> AggregateStats:
    """All aggregate statistics of a pool; agent structure is flattened."""
    vals = pool.values()
    k = vals.size
    deal_mean = float(np.mean(vals))
    deal_second = float(np.mean(vals * vals))
    deal_var = deal_second - deal_mean * deal_mean
    total = k * deal_mean
    agg_vol = (k * k) * deal_var
    if deal_mean == 0.0:
        deal_cv = float("nan")
        agg_cv = float("nan")
    else:
        deal_cv = deal_var / (deal_mean * deal_mean)
        agg_cv = agg_vol / (total * total)
    return AggregateStats(
        k=k,
        deal_mean=deal_mean,
        deal_second=deal_second,
        total=total,
        total_second=k * deal_second,
        agg_mean=total,
        agg_volatility=agg_vol,
        agg_cv_sq=agg_cv,
        deal_cv_sq=deal_cv,
    )


def cv_transfer_check(pool: DealPool) -> CvTransfer:
    """Both CV²s and their absolute gap; the gap is rounding noise only.

    The aggregate CV² is computed from the aggregate moments and the
    per-deal CV² from the deal moments, by independent divisions; their
    agreement is the aggregation identity, not a tautology of shared code.
    """
    stats = aggregate(pool)
    if stats.deal_mean == 0.0:
        raise UndefinedCVError("CV transfer undefined: per-deal mean is zero")
    return CvTransfer(
        agg_cv_sq=stats.agg_cv_sq,
        deal_cv_sq=stats.deal_cv_sq,
        gap=abs(stats.agg_cv_sq - stats.deal_cv_sq),
    )


def pool_from_arrays(
    agents: Iterable[str], times, values, window: WindowSpec
) -> DealPool:
    """Convenience constructor from parallel columns."""
    deals = tuple(
        Deal(str(a), float(t), float(v)) for a, t, v in zip(agents, times, values)
    )
    return DealPool(deals=deals, window=window)
