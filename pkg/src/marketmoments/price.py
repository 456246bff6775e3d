"""Market-based price statistics for one window.

The mean price is the volume-weighted average (total value over total
volume), and the price volatility weights each tick's squared deviation by
the *square* of its volume. Two public routes produce the same numbers:

* :func:`price_stats_direct` works from the per-tick price series and the
  explicit second-power weights;
* :func:`price_stats_closed_form` touches only a window's
  :class:`~marketmoments.moments.MomentSet`.

Their agreement is an algebraic identity, and both are exported precisely
so users can cross-validate the two routes on their own data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _weighting
from .errors import InvalidStatsError, UndefinedCVError
from .moments import MomentSet
from .ticks import WindowSeries

__all__ = [
    "PriceStats",
    "vwap",
    "weights_order2",
    "price_stats_direct",
    "price_stats_closed_form",
    "price_cv_sq",
]


@dataclass(frozen=True)
class PriceStats:
    """Weighted price statistics of one window.

    ``second_moment == volatility + mean²`` holds exactly by construction.
    ``cv_sq`` is NaN when the mean price is zero (CV undefined); the
    checked accessor :func:`price_cv_sq` raises instead.
    ``weighted_price_m1``/``_m2`` are the first and second moments of the
    per-tick price under second-power volume weights.
    """

    mean: float
    second_moment: float
    volatility: float
    cv_sq: float
    weighted_price_m1: float
    weighted_price_m2: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise InvalidStatsError(f"price mean must be finite, got {self.mean}")
        scale = abs(self.second_moment) + abs(self.mean) * abs(self.mean)
        if self.volatility < -1e-9 * scale - 1e-12:
            raise InvalidStatsError(
                f"price volatility {self.volatility} is negative beyond rounding"
            )


def vwap(window: WindowSeries) -> float:
    """Volume-weighted average price: total value over total volume."""
    return _weighting.ratio_mean(
        float(np.sum(window.values)), float(np.sum(window.volumes))
    )


def weights_order2(window: WindowSeries) -> np.ndarray:
    """Per-tick weights volume²/Σvolume²; they sum to one."""
    return _weighting.second_power_weights(window.volumes)


def _build(stats: _weighting.RatioStats) -> PriceStats:
    return PriceStats(
        mean=stats.mean,
        second_moment=stats.variance + stats.mean * stats.mean,
        volatility=stats.variance,
        cv_sq=_weighting.cv_sq_or_nan(stats.mean, stats.variance),
        weighted_price_m1=stats.weighted_m1,
        weighted_price_m2=stats.weighted_m2,
    )


def price_stats_direct(window: WindowSeries) -> PriceStats:
    """Price statistics from the explicit weighted sum over ticks.

    volatility = Σ (price_i − mean)² · w_i with w_i = volume_i²/Σvolume².
    """
    return _build(_weighting.direct_ratio_stats(window.values, window.volumes))


def price_stats_closed_form(moments: MomentSet) -> PriceStats:
    """Price statistics from value/volume moments alone.

    volatility = (var_value + mean²·var_volume − 2·mean·cov) / volume_m2,
    with mean = value_m1/volume_m1 — no per-tick data needed.
    """
    return _build(
        _weighting.closed_ratio_stats(
            moments.value_moments[1],
            moments.value_moments[2],
            moments.volume_moments[1],
            moments.volume_moments[2],
            moments.cross_cu,
        )
    )


def price_cv_sq(stats: PriceStats) -> float:
    """Squared coefficient of variation of price, volatility/mean²."""
    if stats.mean == 0.0:
        raise UndefinedCVError("price CV undefined: mean price is zero")
    return stats.volatility / (stats.mean * stats.mean)
