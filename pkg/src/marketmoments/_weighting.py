"""Internal kernel shared by the price and return estimators.

Both estimator families average a per-tick ratio (price = value/volume,
return = value/past-value) under second-power weights of the denominator
series. Keeping a single implementation guarantees the two families
coincide bit-for-bit whenever their denominator series coincide.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DegenerateWindowError

# Windows whose squared-denominator mass sits this far below the numerator
# scale carry no usable weight information and are rejected, not smoothed.
_DEGENERACY_FLOOR = 1e-300


class RatioStats(NamedTuple):
    """Weighted statistics of a per-tick ratio series."""

    mean: float
    variance: float
    weighted_m1: float
    weighted_m2: float


def ratio_mean(numer_sum: float, base_sum: float) -> float:
    if base_sum == 0.0 or not np.isfinite(base_sum):
        raise DegenerateWindowError(
            f"ratio mean undefined: denominator sum is {base_sum}"
        )
    return numer_sum / base_sum


def second_power_weights(base: np.ndarray) -> np.ndarray:
    sq = base * base
    total = np.sum(sq)
    if not (np.isfinite(total) and total > 0.0):
        raise DegenerateWindowError(
            f"second-power weight mass is {total}; weights undefined"
        )
    return sq / total


def direct_ratio_stats(numer: np.ndarray, base: np.ndarray) -> RatioStats:
    """Mean Σnumer/Σbase plus weighted ratio moments and variance.

    Weights are base_i²/Σbase²; the variance is the explicit weighted sum
    of squared deviations of the per-tick ratio from the mean.
    """
    mean = ratio_mean(float(np.sum(numer)), float(np.sum(base)))
    w = second_power_weights(base)
    ratio = numer / base
    wm1 = float(np.sum(ratio * w))
    wm2 = float(np.sum(ratio * ratio * w))
    dev = ratio - mean
    variance = float(np.sum(dev * dev * w))
    return RatioStats(mean, variance, wm1, wm2)


def closed_ratio_stats(
    numer_m1: float,
    numer_m2: float,
    base_m1: float,
    base_m2: float,
    cross_raw: float,
) -> RatioStats:
    """Same statistics recovered from frequency moments of the two series.

    ``variance = (var_numer + mean²·var_base − 2·mean·cov) / base_m2`` —
    algebraically identical to the weighted sum in
    :func:`direct_ratio_stats` but touching only the five moment scalars.
    """
    if base_m2 <= 0.0 or not np.isfinite(base_m2):
        raise DegenerateWindowError(
            f"second moment of denominator series is {base_m2}"
        )
    if base_m2 < _DEGENERACY_FLOOR * abs(numer_m2):
        raise DegenerateWindowError(
            "denominator second moment is vanishing relative to the "
            f"numerator scale ({base_m2} vs {numer_m2}); window rejected"
        )
    if base_m1 == 0.0:
        raise DegenerateWindowError("denominator mean is zero")
    mean = numer_m1 / base_m1
    var_numer = numer_m2 - numer_m1 * numer_m1
    var_base = base_m2 - base_m1 * base_m1
    cov = cross_raw - numer_m1 * base_m1
    variance = (var_numer + mean * mean * var_base - 2.0 * mean * cov) / base_m2
    return RatioStats(mean, variance, cross_raw / base_m2, numer_m2 / base_m2)


def cv_sq_or_nan(mean: float, variance: float) -> float:
    """variance/mean², or NaN when the mean vanishes (CV undefined)."""
    if mean == 0.0:
        return float("nan")
    return variance / (mean * mean)
