"""Frequency-based moments, volatilities, and cross-correlations.

Everything here treats a window's values (or volumes) as N equally likely
observations: moments are plain ``(1/N)·Σ x^n`` with population
normalization, never the ``1/(N−1)`` sample correction. These raw-series
statistics are the inputs the closed-form price/return estimators consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyWindowError, InvalidStatsError, PairingError, UndefinedCVError
from .ticks import WindowSeries

__all__ = [
    "MomentSet",
    "moment",
    "volatility",
    "cross_correlation",
    "coefficient_of_variation_sq",
    "window_moments",
    "MAX_MOMENT_ORDER",
]

MAX_MOMENT_ORDER = 4


@dataclass(frozen=True)
class MomentSet:
    """Raw-series moments of one window's value and volume sequences.

    ``value_moments[n]`` is the n-th raw moment of the trade values
    (n = 1..4), likewise ``volume_moments``. ``cross_cu`` is the *raw*
    joint mean E[value·volume]; ``corr_cu`` is the centered covariance.
    Volatilities are population variances ``m2 − m1²``.
    """

    n_ticks: int
    value_moments: Mapping[int, float]
    volume_moments: Mapping[int, float]
    cross_cu: float
    value_volatility: float
    volume_volatility: float
    corr_cu: float

    def __post_init__(self):
        if self.n_ticks < 1:
            raise InvalidStatsError("a MomentSet requires at least one tick")
        for name, moms in (("value", self.value_moments), ("volume", self.volume_moments)):
            missing = [n for n in (1, 2) if n not in moms]
            if missing:
                raise InvalidStatsError(f"{name}_moments missing orders {missing}")
        for name, vol, scale in (
            ("value", self.value_volatility, self.value_moments[2]),
            ("volume", self.volume_volatility, self.volume_moments[2]),
        ):
            if vol < -1e-9 * abs(scale) - 1e-12:
                raise InvalidStatsError(
                    f"{name} volatility {vol} is negative beyond rounding tolerance"
                )


def _as_series(series) -> np.ndarray:
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if arr.size == 0:
        raise EmptyWindowError("empty window: no observations to average")
    return arr


def moment(series: Sequence[float], order: int) -> float:
    """n-th raw moment ``(1/N)·Σ x^n`` for n in 1..4."""
    if not 1 <= order <= MAX_MOMENT_ORDER:
        raise ValueError(f"moment order must be in 1..{MAX_MOMENT_ORDER}, got {order}")
    arr = _as_series(series)
    if order == 1:
        return float(np.mean(arr))
    return float(np.mean(arr**order))


def volatility(series: Sequence[float]) -> float:
    """Population variance ``m2 − m1²`` of the series."""
    m1 = moment(series, 1)
    return moment(series, 2) - m1 * m1


def cross_correlation(a: Sequence[float], b: Sequence[float]) -> float:
    """Centered joint co-variation ``E[a·b] − E[a]·E[b]``.

    Requires the two series to be paired element-by-element; refusing
    unequal lengths is deliberate (there is no defensible implicit pairing).
    """
    x = _as_series(a)
    y = _as_series(b)
    if x.size != y.size:
        raise PairingError(
            f"cannot pair series of lengths {x.size} and {y.size}"
        )
    return float(np.mean(x * y)) - float(np.mean(x)) * float(np.mean(y))


def coefficient_of_variation_sq(series: Sequence[float]) -> float:
    """Squared coefficient of variation, variance/mean²."""
    m1 = moment(series, 1)
    if m1 == 0.0:
        raise UndefinedCVError("coefficient of variation undefined for zero mean")
    return volatility(series) / (m1 * m1)


def window_moments(window: WindowSeries) -> MomentSet:
    """All MomentSet fields for one window, from its value/volume arrays."""
    values = window.values
    volumes = window.volumes
    vmom = {n: moment(values, n) for n in range(1, MAX_MOMENT_ORDER + 1)}
    umom = {n: moment(volumes, n) for n in range(1, MAX_MOMENT_ORDER + 1)}
    cross = float(np.mean(values * volumes))
    return MomentSet(
        n_ticks=len(window),
        value_moments=vmom,
        volume_moments=umom,
        cross_cu=cross,
        value_volatility=vmom[2] - vmom[1] * vmom[1],
        volume_volatility=umom[2] - umom[1] * umom[1],
        corr_cu=cross - vmom[1] * umom[1],
    )
