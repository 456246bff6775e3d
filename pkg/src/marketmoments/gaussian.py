"""Two-moment Gaussian forecast ceiling and departure metrics.

Knowing only a variable's mean and variance, the least-presumptive forecast
distribution is the Gaussian built from those two numbers. This module
constructs that distribution for any upstream statistics object and
measures what the two-moment view discards: the Kolmogorov–Smirnov distance
of an empirical sample from its matched Gaussian, plus the sample's
skewness and excess kurtosis (both identically zero for the Gaussian).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import InvalidStatsError

__all__ = [
    "GaussianApprox",
    "GaussianGap",
    "gaussian_from_stats",
    "pdf",
    "cdf",
    "quantile",
    "gaussian_gap",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianApprox:
    """Gaussian with the given mean and variance; variance 0 is a point mass."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise InvalidStatsError(
                f"Gaussian parameters must be finite, got "
                f"mean={self.mean}, variance={self.variance}"
            )
        if self.variance < 0:
            raise InvalidStatsError(
                f"variance must be >= 0, got {self.variance}"
            )

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x):
        """Density at x; for the point mass: +inf at the mean, 0 elsewhere."""
        if self.variance == 0.0:
            x = np.asarray(x, dtype=np.float64)
            out = np.where(x == self.mean, np.inf, 0.0)
            return float(out) if out.ndim == 0 else out
        s = self.std
        z = (np.asarray(x, dtype=np.float64) - self.mean) / s
        out = np.exp(-0.5 * z * z) * (_INV_SQRT_2PI / s)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        """P[X ≤ x]; for the point mass a right-continuous unit step."""
        if self.variance == 0.0:
            x = np.asarray(x, dtype=np.float64)
            out = np.where(x >= self.mean, 1.0, 0.0)
            return float(out) if out.ndim == 0 else out
        z = (np.asarray(x, dtype=np.float64) - self.mean) / self.std
        out = ndtr(z)
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, p):
        """Inverse CDF on the open interval (0, 1)."""
        p_arr = np.asarray(p, dtype=np.float64)
        if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
            raise ValueError(f"quantile probability must lie in (0, 1), got {p}")
        if self.variance == 0.0:
            out = np.full_like(p_arr, self.mean)
            return float(out) if out.ndim == 0 else out
        out = self.mean + self.std * ndtri(p_arr)
        return float(out) if np.ndim(out) == 0 else out


class GaussianGap(NamedTuple):
    """How far a sample sits from its two-moment Gaussian."""

    ks_statistic: float
    excess_skewness: float
    excess_kurtosis: float


def gaussian_from_stats(mean: float, volatility: float) -> GaussianApprox:
    """The forecast distribution a mean and a variance can justify."""
    if volatility < 0 or not math.isfinite(volatility):
        raise InvalidStatsError(
            f"cannot build a Gaussian from negative volatility {volatility}"
        )
    return GaussianApprox(mean=float(mean), variance=float(volatility))


def pdf(g: GaussianApprox, x):
    return g.pdf(x)


def cdf(g: GaussianApprox, x):
    return g.cdf(x)


def quantile(g: GaussianApprox, p):
    return g.quantile(p)


def _sample_shape(samples: np.ndarray) -> tuple[float, float]:
    """Population skewness and excess kurtosis; zeros for constant samples."""
    m = float(np.mean(samples))
    dev = samples - m
    m2 = float(np.mean(dev * dev))
    if m2 == 0.0:
        return 0.0, 0.0
    m3 = float(np.mean(dev * dev * dev))
    m4 = float(np.mean((dev * dev) * (dev * dev)))
    return m3 / m2**1.5, m4 / (m2 * m2) - 3.0


def gaussian_gap(samples: Sequence[float], g: GaussianApprox) -> GaussianGap:
    """KS distance plus third/fourth-moment residuals of samples vs ``g``.

    A point-mass ``g`` yields (0, 0, 0) when every sample equals its mean
    and an infinite KS sentinel otherwise — there is no graded distance to
    a distribution that admits a single value.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size < 2:
        raise ValueError(f"need at least 2 samples, got {arr.size}")
    if g.variance == 0.0:
        if np.all(arr == g.mean):
            return GaussianGap(0.0, 0.0, 0.0)
        skew, kurt = _sample_shape(arr)
        return GaussianGap(float("inf"), skew, kurt)

    xs = np.sort(arr)
    n = xs.size
    u = ndtr((xs - g.mean) / g.std)
    grid = np.arange(1, n + 1, dtype=np.float64) / n
    ks = float(max(np.max(grid - u), np.max(u - (grid - 1.0 / n))))
    skew, kurt = _sample_shape(arr)
    return GaussianGap(ks, skew, kurt)
