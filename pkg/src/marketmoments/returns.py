"""Market-based return statistics for one window at a fixed lag.

A tick's return over lag τ is its price divided by the price traded most
recently at or before ``time − τ``. The estimators mirror the price module
exactly, with one substitution: where price statistics weight by trade
volume, return statistics weight by the tick's *past value* (past price ×
volume). Both modules share one kernel, so feeding a lagged set whose past
values equal the volumes reproduces the price statistics bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from . import _weighting
from .errors import (
    EmptyLaggedWindowError,
    InvalidStatsError,
    InvalidTickError,
    UndefinedCVError,
    UnsortedInputError,
)
from .moments import moment
from .ticks import TradeTick, WindowSeries

__all__ = [
    "LaggedTick",
    "LaggedSeries",
    "ReturnStats",
    "build_lagged",
    "build_lagged_arrays",
    "mean_return",
    "return_stats_direct",
    "return_stats_closed_form",
    "return_cv_sq",
]


@dataclass(frozen=True)
class LaggedTick:
    """One tick paired with its resolved past price.

    ``past_value = past_price · volume`` and ``ret = value / past_value``,
    so ``ret · past_value`` recovers ``value`` to a rounding error.
    """

    tick: TradeTick
    past_price: float
    past_value: float
    ret: float

    def __post_init__(self):
        if not (math.isfinite(self.past_price) and self.past_price > 0):
            raise InvalidTickError(
                f"past price must be finite and > 0, got {self.past_price}"
            )
        if not math.isclose(
            self.past_value, self.past_price * self.tick.volume, rel_tol=1e-9
        ):
            raise InvalidTickError(
                f"past value {self.past_value} inconsistent with "
                f"past_price*volume = {self.past_price * self.tick.volume}"
            )
        if not math.isclose(
            self.ret * self.past_value, self.tick.value, rel_tol=1e-9, abs_tol=1e-300
        ):
            raise InvalidTickError(
                f"return {self.ret} inconsistent with value/past_value"
            )

    @classmethod
    def from_tick(cls, tick: TradeTick, past_price: float) -> "LaggedTick":
        if not (math.isfinite(past_price) and past_price > 0):
            raise InvalidTickError(
                f"past price must be finite and > 0, got {past_price}"
            )
        past_value = past_price * tick.volume
        return cls(tick, past_price, past_value, tick.value / past_value)


class LaggedSeries:
    """Lag-resolved ticks of one window, array-backed.

    Iterating yields :class:`LaggedTick` records; the estimators below read
    the arrays directly. ``unresolved`` counts window ticks dropped because
    no trade existed at or before ``time − lag``.
    """

    __slots__ = ("lag", "times", "values", "volumes", "past_prices",
                 "past_values", "rets", "unresolved")

    def __init__(self, lag, times, values, volumes, past_prices, unresolved=0):
        self.lag = float(lag)
        self.times = np.asarray(times, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        self.volumes = np.asarray(volumes, dtype=np.float64)
        self.past_prices = np.asarray(past_prices, dtype=np.float64)
        if not (self.times.size == self.values.size == self.volumes.size
                == self.past_prices.size):
            raise ValueError("lagged arrays must have equal length")
        if self.times.size == 0:
            raise EmptyLaggedWindowError("a lagged series must contain ticks")
        bad = np.flatnonzero(~(np.isfinite(self.past_prices) & (self.past_prices > 0)))
        if bad.size:
            raise InvalidTickError(
                f"past price must be > 0, got {self.past_prices[bad[0]]} "
                f"at index {int(bad[0])}"
            )
        self.past_values = self.past_prices * self.volumes
        self.rets = self.values / self.past_values
        self.unresolved = int(unresolved)

    @classmethod
    def from_items(cls, items: Sequence[LaggedTick], lag: float,
                   unresolved: int = 0) -> "LaggedSeries":
        items = list(items)
        return cls(
            lag,
            [lt.tick.time for lt in items],
            [lt.tick.value for lt in items],
            [lt.tick.volume for lt in items],
            [lt.past_price for lt in items],
            unresolved,
        )

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, i: int) -> LaggedTick:
        tick = TradeTick(float(self.times[i]), float(self.values[i]),
                         float(self.volumes[i]))
        return LaggedTick(tick, float(self.past_prices[i]),
                          float(self.past_values[i]), float(self.rets[i]))

    def __iter__(self) -> Iterator[LaggedTick]:
        return (self[i] for i in range(len(self)))

    def __repr__(self) -> str:
        return (f"LaggedSeries(lag={self.lag}, n={len(self)}, "
                f"unresolved={self.unresolved})")


Lagged = Union[LaggedSeries, Sequence[LaggedTick]]


@dataclass(frozen=True)
class ReturnStats:
    """Weighted return statistics of one window at lag τ.

    Same shape as the price statistics: ``second_moment`` equals
    ``volatility + mean²`` exactly, and ``cv_sq`` is NaN when the mean
    return is zero.
    """

    mean: float
    second_moment: float
    volatility: float
    cv_sq: float
    lag: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise InvalidStatsError(f"return mean must be finite, got {self.mean}")
        scale = abs(self.second_moment) + self.mean * self.mean
        if self.volatility < -1e-9 * scale - 1e-12:
            raise InvalidStatsError(
                f"return volatility {self.volatility} is negative beyond rounding"
            )


def build_lagged(window: WindowSeries, history: Sequence[TradeTick],
                 lag: float) -> LaggedSeries:
    """Resolve each window tick's past price from a sorted trade history.

    The past price at ``t − lag`` is the price of the most recent history
    tick with ``time ≤ t − lag``. Ticks with no such history are excluded
    and counted in ``unresolved``; if none resolve, an
    :class:`EmptyLaggedWindowError` is raised.
    """
    hist_times = np.array([t.time for t in history], dtype=np.float64)
    hist_prices = np.array([t.price for t in history], dtype=np.float64)
    return build_lagged_arrays(window, hist_times, hist_prices, lag)


def build_lagged_arrays(window: WindowSeries, hist_times, hist_prices,
                        lag: float) -> LaggedSeries:
    """Array variant of :func:`build_lagged` for bulk histories."""
    if not (math.isfinite(lag) and lag > 0):
        raise ValueError(f"lag must be positive and finite, got {lag}")
    hist_times = np.asarray(hist_times, dtype=np.float64)
    hist_prices = np.asarray(hist_prices, dtype=np.float64)
    bad = np.flatnonzero(np.diff(hist_times) < 0)
    if bad.size:
        raise UnsortedInputError(int(bad[0]) + 1)

    idx = np.searchsorted(hist_times, window.times - lag, side="right") - 1
    resolved = idx >= 0
    n_unresolved = int(np.count_nonzero(~resolved))
    if n_unresolved == len(window):
        raise EmptyLaggedWindowError(
            f"no tick in window at {window.spec.center} has a resolvable "
            f"past price at lag {lag}"
        )
    return LaggedSeries(
        lag,
        window.times[resolved],
        window.values[resolved],
        window.volumes[resolved],
        hist_prices[idx[resolved]],
        unresolved=n_unresolved,
    )


def _as_series(lagged: Lagged) -> LaggedSeries:
    if isinstance(lagged, LaggedSeries):
        return lagged
    return LaggedSeries.from_items(list(lagged), lag=float("nan"))


def mean_return(lagged: Lagged) -> float:
    """Past-value-weighted mean return: Σvalue / Σpast_value."""
    s = _as_series(lagged)
    return _weighting.ratio_mean(float(np.sum(s.values)), float(np.sum(s.past_values)))


def _build(stats: _weighting.RatioStats, lag: float) -> ReturnStats:
    return ReturnStats(
        mean=stats.mean,
        second_moment=stats.variance + stats.mean * stats.mean,
        volatility=stats.variance,
        cv_sq=_weighting.cv_sq_or_nan(stats.mean, stats.variance),
        lag=lag,
    )


def return_stats_direct(lagged: Lagged) -> ReturnStats:
    """Return statistics from the explicit weighted sum over lagged ticks.

    volatility = Σ (ret_i − mean)²·w_i with w_i = past_value_i²/Σpast_value².
    """
    s = _as_series(lagged)
    return _build(_weighting.direct_ratio_stats(s.values, s.past_values), s.lag)


def return_stats_closed_form(lagged: Lagged) -> ReturnStats:
    """Return statistics from value/past-value moments alone."""
    s = _as_series(lagged)
    return _build(
        _weighting.closed_ratio_stats(
            moment(s.values, 1),
            moment(s.values, 2),
            moment(s.past_values, 1),
            moment(s.past_values, 2),
            float(np.mean(s.values * s.past_values)),
        ),
        s.lag,
    )


def return_cv_sq(stats: ReturnStats) -> float:
    """Squared coefficient of variation of the return, volatility/mean²."""
    if stats.mean == 0.0:
        raise UndefinedCVError("return CV undefined: mean return is zero")
    return stats.volatility / (stats.mean * stats.mean)
