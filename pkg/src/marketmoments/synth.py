"""Reproducible synthetic trade streams with controlled correlation.

Ticks are spaced on a fixed grid; value and volume marginals come from a
small family (lognormal, gamma, constant) and their dependence is induced
through a pair of correlated latent normals (Gaussian copula). The latent
correlation is calibrated so the *Pearson* correlation between value and
volume matches the requested target; targets outside the attainable range
for the chosen marginals are rejected with that range in the message.

Random streams are sharded by tick index: shard k always consumes the
generator seeded by ``(seed, shard=k)``, so output is byte-identical no
matter how generation is chunked or distributed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.optimize import brentq
from scipy.special import gammaincinv, ndtr, ndtri

from .errors import InfeasibleSpecError
from .macro import Deal, DealPool
from .ticks import TradeTick, WindowSpec

__all__ = [
    "Lognormal",
    "Gamma",
    "Constant",
    "Marginal",
    "GenSpec",
    "generate",
    "generate_arrays",
    "iter_generated_chunks",
    "agent_pool",
    "attainable_corr_range",
    "GENERATOR_ID",
    "SHARD_SIZE",
]

GENERATOR_ID = (
    "numpy.random.PCG64 / SeedSequence(seed, spawn_key=(shard,)), "
    f"inverse-transform sampling, numpy {np.__version__}"
)

SHARD_SIZE = 1 << 20

# smallest uniform fed to the normal quantile; keeps latents in ±8.3 sigma
_U_FLOOR = 2.0**-53

# open-interval clamp for probabilities fed to inverse CDFs: ndtr saturates
# to exactly 1.0 past ~8.3 sigma, and a saturated probability would send
# gammaincinv to infinity
_P_LO = np.nextafter(0.0, 1.0)
_P_HI = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class Lognormal:
    """exp(mu + sigma·Z) for standard normal Z."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise InfeasibleSpecError("lognormal parameters must be finite")
        if self.sigma < 0:
            raise InfeasibleSpecError(f"lognormal sigma must be >= 0, got {self.sigma}")

    @property
    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma * self.sigma)

    @property
    def variance(self) -> float:
        s2 = self.sigma * self.sigma
        return (math.exp(s2) - 1.0) * math.exp(2.0 * self.mu + s2)

    def ppf_from_normal(self, z: np.ndarray) -> np.ndarray:
        return np.exp(self.mu + self.sigma * np.asarray(z, dtype=np.float64))


@dataclass(frozen=True)
class Gamma:
    """Gamma(shape) scaled; strictly positive support."""

    shape: float
    scale: float

    def __post_init__(self):
        ok = (
            math.isfinite(self.shape)
            and math.isfinite(self.scale)
            and self.shape > 0
            and self.scale > 0
        )
        if not ok:
            raise InfeasibleSpecError(
                f"gamma requires shape > 0 and scale > 0, got "
                f"shape={self.shape}, scale={self.scale}"
            )

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale * self.scale

    def ppf_from_normal(self, z: np.ndarray) -> np.ndarray:
        u = np.clip(ndtr(np.asarray(z, dtype=np.float64)), _P_LO, _P_HI)
        return self.scale * gammaincinv(self.shape, u)


@dataclass(frozen=True)
class Constant:
    """Degenerate marginal: every draw is the same value."""

    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise InfeasibleSpecError(f"constant marginal must be finite, got {self.value}")

    @property
    def mean(self) -> float:
        return self.value

    @property
    def variance(self) -> float:
        return 0.0

    def ppf_from_normal(self, z: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(z, dtype=np.float64), self.value)


Marginal = Union[Lognormal, Gamma, Constant]


@dataclass(frozen=True)
class GenSpec:
    """Everything that determines a synthetic stream, seed included."""

    n_ticks: int
    time_step: float
    value_dist: Marginal
    volume_dist: Marginal
    target_corr_cu: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_ticks < 1:
            raise InfeasibleSpecError(f"n_ticks must be >= 1, got {self.n_ticks}")
        if not (math.isfinite(self.time_step) and self.time_step > 0):
            raise InfeasibleSpecError(
                f"time_step must be positive and finite, got {self.time_step}"
            )
        if not (math.isfinite(self.target_corr_cu) and abs(self.target_corr_cu) <= 1):
            raise InfeasibleSpecError(
                f"target_corr_cu must lie in [-1, 1], got {self.target_corr_cu}"
            )
        if isinstance(self.volume_dist, Constant) and self.volume_dist.value <= 0:
            raise InfeasibleSpecError(
                f"volumes must be strictly positive, got constant {self.volume_dist.value}"
            )
        if self.seed < 0:
            raise InfeasibleSpecError(f"seed must be nonnegative, got {self.seed}")


# --- latent-correlation calibration ---------------------------------------

_QUAD_NODES = 96


def _corr_from_cross(ex_y: float, a: Marginal, b: Marginal) -> float:
    return (ex_y - a.mean * b.mean) / math.sqrt(a.variance * b.variance)


def _pearson_lognormal(a: Lognormal, b: Lognormal, r: float) -> float:
    num = math.expm1(a.sigma * b.sigma * r)
    den = math.sqrt(math.expm1(a.sigma**2) * math.expm1(b.sigma**2))
    return num / den


def _pearson_quadrature(a: Marginal, b: Marginal, r: float) -> float:
    nodes, wts = hermegauss(_QUAD_NODES)
    wts = wts / math.sqrt(2.0 * math.pi)
    xa = a.ppf_from_normal(nodes)
    if abs(r) == 1.0:
        xb = b.ppf_from_normal(math.copysign(1.0, r) * nodes)
        return _corr_from_cross(float(np.sum(wts * xa * xb)), a, b)
    z2 = r * nodes[:, None] + math.sqrt(1.0 - r * r) * nodes[None, :]
    xb = b.ppf_from_normal(z2)
    ex_y = float(wts @ (xb @ wts * xa))
    return _corr_from_cross(ex_y, a, b)


def _pearson_at(a: Marginal, b: Marginal, r: float) -> float:
    if isinstance(a, Lognormal) and isinstance(b, Lognormal):
        return _pearson_lognormal(a, b, r)
    return _pearson_quadrature(a, b, r)


def attainable_corr_range(value_dist: Marginal, volume_dist: Marginal) -> tuple[float, float]:
    """Pearson correlations reachable by the latent-normal coupling."""
    if value_dist.variance == 0.0 or volume_dist.variance == 0.0:
        return (0.0, 0.0)
    return (
        _pearson_at(value_dist, volume_dist, -1.0),
        _pearson_at(value_dist, volume_dist, 1.0),
    )


def _calibrate_latent_corr(spec: GenSpec) -> float:
    target = spec.target_corr_cu
    a, b = spec.value_dist, spec.volume_dist
    if a.variance == 0.0 or b.variance == 0.0:
        if target != 0.0:
            raise InfeasibleSpecError(
                f"target correlation {target} unattainable with a "
                "zero-variance marginal; attainable range is [0.0, 0.0]"
            )
        return 0.0
    if target == 0.0:
        return 0.0
    lo, hi = attainable_corr_range(a, b)
    if not lo - 1e-12 <= target <= hi + 1e-12:
        raise InfeasibleSpecError(
            f"target correlation {target} outside the attainable range "
            f"[{lo:.6f}, {hi:.6f}] for these marginals"
        )
    if isinstance(a, Lognormal) and isinstance(b, Lognormal):
        # closed form: corr = expm1(sa·sb·r) / sqrt(expm1(sa²)·expm1(sb²))
        den = math.sqrt(math.expm1(a.sigma**2) * math.expm1(b.sigma**2))
        return min(1.0, max(-1.0, math.log1p(target * den) / (a.sigma * b.sigma)))
    if target >= hi:
        return 1.0
    if target <= lo:
        return -1.0
    return float(
        brentq(lambda r: _pearson_quadrature(a, b, r) - target, -1.0, 1.0, xtol=1e-12)
    )


# --- stream generation -----------------------------------------------------


def _shard_rng(seed: int, shard: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(shard,)))


def _latents_for_range(seed: int, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    """Two independent standard-normal streams for tick indices [start, stop).

    Each shard's uniforms are always drawn in full from that shard's own
    generator, so any [start, stop) slicing reproduces the same numbers.
    """
    z1_parts = []
    z2_parts = []
    first, last = start // SHARD_SIZE, (stop - 1) // SHARD_SIZE
    for shard in range(first, last + 1):
        rng = _shard_rng(seed, shard)
        u1 = rng.random(SHARD_SIZE)
        u2 = rng.random(SHARD_SIZE)
        lo = max(start - shard * SHARD_SIZE, 0)
        hi = min(stop - shard * SHARD_SIZE, SHARD_SIZE)
        z1_parts.append(ndtri(np.maximum(u1[lo:hi], _U_FLOOR)))
        z2_parts.append(ndtri(np.maximum(u2[lo:hi], _U_FLOOR)))
    return np.concatenate(z1_parts), np.concatenate(z2_parts)


def generate_arrays(
    spec: GenSpec, start: int = 0, count: int | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(times, values, volumes) for tick indices [start, start+count).

    Output for a given index range depends only on the spec, never on how
    the range is split across calls.
    """
    if count is None:
        count = spec.n_ticks - start
    if start < 0 or count < 0 or start + count > spec.n_ticks:
        raise ValueError(
            f"index range [{start}, {start + count}) outside stream of {spec.n_ticks}"
        )
    r = _calibrate_latent_corr(spec)
    if count == 0:
        empty = np.empty(0, dtype=np.float64)
        return empty, empty.copy(), empty.copy()
    z1, z2 = _latents_for_range(spec.seed, start, start + count)
    z_vol = r * z1 + math.sqrt(max(0.0, 1.0 - r * r)) * z2
    values = spec.value_dist.ppf_from_normal(z1)
    volumes = spec.volume_dist.ppf_from_normal(z_vol)
    if not np.all(volumes > 0):
        raise InfeasibleSpecError(
            "volume marginal produced nonpositive draws; parameters too extreme"
        )
    times = np.arange(start, start + count, dtype=np.float64) * spec.time_step
    return times, values, volumes


def generate(spec: GenSpec) -> list[TradeTick]:
    """The whole stream as tick records (use the array variants for bulk)."""
    times, values, volumes = generate_arrays(spec)
    return [
        TradeTick(float(t), float(c), float(u))
        for t, c, u in zip(times, values, volumes)
    ]


def iter_generated_chunks(
    spec: GenSpec, chunk: int = SHARD_SIZE
) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Stream the spec's ticks in index order without holding them all."""
    if chunk < 1:
        raise ValueError(f"chunk must be >= 1, got {chunk}")
    start = 0
    while start < spec.n_ticks:
        n = min(chunk, spec.n_ticks - start)
        yield generate_arrays(spec, start, n)
        start += n


def agent_pool(spec: GenSpec, n_agents: int, seed: int) -> DealPool:
    """A multi-agent deal pool whose flattened values follow the spec.

    Deal values and times come from the spec's value stream; each deal is
    assigned to one of ``n_agents`` uniformly by the split seed. The
    enclosing window spans the whole stream.
    """
    if n_agents < 1:
        raise ValueError(f"n_agents must be >= 1, got {n_agents}")
    times, values, _ = generate_arrays(spec)
    rng = _shard_rng(seed, shard=0xA5)
    owners = rng.integers(0, n_agents, size=spec.n_ticks)
    span = spec.n_ticks * spec.time_step
    window = WindowSpec(center=span / 2.0, width=span)
    deals = tuple(
        Deal(f"agent-{int(a)}", float(t), float(v))
        for a, t, v in zip(owners, times, values)
    )
    return DealPool(deals=deals, window=window)
