"""Shared fixtures and independent oracles.

Oracles here deliberately avoid the library's own kernels: everything is
plain Python + math.fsum (or fractions.Fraction) so that a bug in the
numpy paths cannot hide behind an identical bug in the checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from marketmoments import TradeTick, WindowSeries, WindowSpec

settings.register_profile(
    "repo",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


# ---------------------------------------------------------------------------
# brute-force statistical oracles (fsum / Fraction based)
# ---------------------------------------------------------------------------

def oracle_mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def oracle_raw_moment(xs: Sequence[float], order: int) -> float:
    return math.fsum(float(x) ** order for x in xs) / len(xs)


def oracle_variance(xs: Sequence[float]) -> float:
    m = oracle_mean(xs)
    return math.fsum((float(x) - m) ** 2 for x in xs) / len(xs)


def oracle_cross(a: Sequence[float], b: Sequence[float]) -> float:
    assert len(a) == len(b)
    mixed = math.fsum(float(x) * float(y) for x, y in zip(a, b)) / len(a)
    return mixed - oracle_mean(a) * oracle_mean(b)


@dataclass
class RatioOracle:
    """Weighted ratio statistics computed the slow, obvious way."""

    mean: float
    variance: float
    second_moment: float
    weighted_m1: float
    weighted_m2: float
    cv_sq: float


def oracle_ratio_stats(numer: Sequence[float], base: Sequence[float]) -> RatioOracle:
    numer = [float(x) for x in numer]
    base = [float(x) for x in base]
    mean = math.fsum(numer) / math.fsum(base)
    wt_norm = math.fsum(b * b for b in base)
    weights = [b * b / wt_norm for b in base]
    ratios = [n / b for n, b in zip(numer, base)]
    variance = math.fsum(w * (r - mean) ** 2 for w, r in zip(weights, ratios))
    weighted_m1 = math.fsum(w * r for w, r in zip(weights, ratios))
    weighted_m2 = math.fsum(w * r * r for w, r in zip(weights, ratios))
    cv = variance / (mean * mean) if mean != 0.0 else math.nan
    return RatioOracle(mean, variance, variance + mean * mean,
                       weighted_m1, weighted_m2, cv)


def fraction_variance(xs: Sequence[int]) -> Fraction:
    vals = [Fraction(x) for x in xs]
    m = sum(vals) / len(vals)
    return sum((v - m) ** 2 for v in vals) / len(vals)


def rel_err(got: float, want: float) -> float:
    if got == want:
        return 0.0
    scale = max(abs(got), abs(want), 1e-300)
    return abs(got - want) / scale


# ---------------------------------------------------------------------------
# randomised window corpus
# ---------------------------------------------------------------------------

LATENT_CORRS = (-0.8, 0.0, 0.8)


def random_window_arrays(rng: np.random.Generator, n: int, latent_corr: float):
    """Correlated lognormal (value, volume) draws via a Gaussian copula."""
    z1 = rng.standard_normal(n)
    z2 = latent_corr * z1 + math.sqrt(1.0 - latent_corr ** 2) * rng.standard_normal(n)
    values = np.exp(1.2 + 0.6 * z1)
    volumes = np.exp(0.3 + 0.5 * z2)
    times = np.cumsum(rng.uniform(0.01, 0.2, size=n))
    return times, values, volumes


def make_window(rng: np.random.Generator, n: int, latent_corr: float) -> WindowSeries:
    times, values, volumes = random_window_arrays(rng, n, latent_corr)
    hi = float(times[-1]) + 1.0
    spec = WindowSpec(center=hi / 2.0, width=hi)
    return WindowSeries(spec, times, values, volumes)


def window_suite(seed: int, count: int, max_ticks: int = 500):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(1, max_ticks + 1))
        corr = LATENT_CORRS[i % len(LATENT_CORRS)]
        out.append(make_window(rng, n, corr))
    return out


# ---------------------------------------------------------------------------
# worked fixtures reused across modules
# ---------------------------------------------------------------------------

@pytest.fixture
def two_tick_equal_volume() -> WindowSeries:
    # values 10, 6 on volume 2 each -> prices 5 and 3
    ticks = [TradeTick(time=1.0, value=10.0, volume=2.0),
             TradeTick(time=2.0, value=6.0, volume=2.0)]
    return WindowSeries.from_ticks(WindowSpec(center=5.0, width=10.0), ticks)


@pytest.fixture
def two_tick_skewed() -> WindowSeries:
    # values 12, 2 on volumes 3, 1 -> prices 4 and 2
    ticks = [TradeTick(time=1.0, value=12.0, volume=3.0),
             TradeTick(time=2.0, value=2.0, volume=1.0)]
    return WindowSeries.from_ticks(WindowSpec(center=5.0, width=10.0), ticks)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260813)
