"""Uncertainty of linear combinations of correlated random components.

A composite variable ``A = Σ β(q)·A(q)`` inherits its variance from the
component variances plus every signed pairwise co-variation term:

    σ_A² = Σ β(q)²·σ²(q) + 2·Σ_{q<k} β(q)β(k)·corr(q,k)

The decomposition weights θ(q) = β(q)²A(q)²/A² and Φ(q,k) =
β(q)β(k)A(q)A(k)/A² keep the sign of β(q)β(k); their signed sum satisfies
Σθ + 2ΣΦ = 1 identically. Profit-style variables (revenues minus
expenses) are the special case with one negative coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    IncompleteSpecError,
    InfeasibleSpecError,
    InvalidStatsError,
    UndefinedCVError,
)

__all__ = [
    "ComponentStat",
    "CorrelationMatrix",
    "CompositeStats",
    "MonteCarloResult",
    "composite_stats",
    "profit_stats",
    "monte_carlo_composite_oracle",
]


@dataclass(frozen=True)
class ComponentStat:
    """One component of a composite variable: coefficient, mean, variance."""

    label: str
    beta: float
    mean: float
    volatility: float

    def __post_init__(self):
        for name in ("beta", "mean", "volatility"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidStatsError(f"component {self.label!r}: {name} is {v}")
        if self.volatility < 0:
            raise InvalidStatsError(
                f"component {self.label!r}: volatility must be >= 0, "
                f"got {self.volatility}"
            )


class CorrelationMatrix:
    """Symmetric pairwise co-variation map keyed by component labels.

    Entries are centered co-variations E[(a(q)−A(q))·(a(k)−A(k))] — i.e.
    covariances, not normalized correlation coefficients. Lookup is
    order-insensitive; a missing pair is an error rather than an implicit
    zero, so silently-forgotten couplings cannot corrupt a variance.
    """

    def __init__(self, entries: Mapping[tuple[str, str], float] | None = None):
        self._entries: dict[tuple[str, str], float] = {}
        if entries:
            for (q, k), v in entries.items():
                self.set(q, k, v)

    @staticmethod
    def _key(q: str, k: str) -> tuple[str, str]:
        return (q, k) if q <= k else (k, q)

    def set(self, q: str, k: str, value: float) -> None:
        if q == k:
            raise InvalidStatsError(
                f"diagonal entry ({q!r},{q!r}) is the component volatility; "
                "it does not belong in the pairwise matrix"
            )
        if not math.isfinite(value):
            raise InvalidStatsError(f"co-variation ({q!r},{k!r}) is {value}")
        key = self._key(q, k)
        old = self._entries.get(key)
        if old is not None and old != value:
            raise InvalidStatsError(
                f"conflicting co-variation for ({q!r},{k!r}): {old} vs {value}"
            )
        self._entries[key] = value

    def get(self, q: str, k: str) -> float:
        try:
            return self._entries[self._key(q, k)]
        except KeyError:
            raise IncompleteSpecError(
                f"no co-variation supplied for component pair ({q!r}, {k!r})"
            ) from None

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return self._key(*pair) in self._entries

    def items(self):
        return self._entries.items()

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"CorrelationMatrix({self._entries!r})"


@dataclass(frozen=True)
class CompositeStats:
    """Mean, variance, CV², and the signed decomposition weights.

    ``theta`` maps each label to its squared relative weight; ``phi`` and
    ``psi`` map ordered pairs (input component order, q before k). The
    identity Σθ + 2ΣΦ = 1 holds for every instance.
    """

    mean: float
    volatility: float
    cv_sq: float
    theta: Mapping[str, float] = field(default_factory=dict)
    phi: Mapping[tuple[str, str], float] = field(default_factory=dict)
    psi: Mapping[tuple[str, str], float] = field(default_factory=dict)


class MonteCarloResult(NamedTuple):
    sample_mean: float
    sample_variance: float
    draws: int


def _check_components(components: Sequence[ComponentStat]) -> list[ComponentStat]:
    comps = list(components)
    if not comps:
        raise IncompleteSpecError("a composite variable needs at least one component")
    labels = [c.label for c in comps]
    if len(set(labels)) != len(labels):
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        raise InvalidStatsError(f"duplicate component labels: {dupes}")
    return comps


def _check_bound(q: ComponentStat, k: ComponentStat, cov: float) -> None:
    bound = math.sqrt(q.volatility * k.volatility)
    if abs(cov) > bound * (1 + 1e-9) + 1e-12:
        raise InvalidStatsError(
            f"co-variation ({q.label!r},{k.label!r}) = {cov} exceeds the "
            f"attainable bound ±{bound}"
        )


def composite_stats(
    components: Sequence[ComponentStat], corr: CorrelationMatrix
) -> CompositeStats:
    """Moments of Σ β(q)·a(q) plus the signed θ/Φ/Ψ decomposition.

    Every off-diagonal pair must be present in ``corr``. The composite
    mean must be nonzero — θ, Φ, and CV² all normalize by its square.
    """
    comps = _check_components(components)
    mean = math.fsum(c.beta * c.mean for c in comps)

    var_terms = [c.beta * c.beta * c.volatility for c in comps]
    cross_terms = []
    pair_cov = {}
    for i, cq in enumerate(comps):
        for ck in comps[i + 1 :]:
            cov = corr.get(cq.label, ck.label)
            _check_bound(cq, ck, cov)
            pair_cov[(cq.label, ck.label)] = cov
            cross_terms.append(2.0 * cq.beta * ck.beta * cov)
    volatility = math.fsum(var_terms + cross_terms)

    if mean == 0.0:
        raise UndefinedCVError(
            "composite mean is zero: CV and the relative weights are undefined"
        )
    msq = mean * mean
    theta = {c.label: (c.beta * c.mean) * (c.beta * c.mean) / msq for c in comps}
    phi = {}
    psi = {}
    for i, cq in enumerate(comps):
        for ck in comps[i + 1 :]:
            pair = (cq.label, ck.label)
            phi[pair] = (cq.beta * ck.beta) * (cq.mean * ck.mean) / msq
            denom = cq.mean * ck.mean
            psi[pair] = pair_cov[pair] / denom if denom != 0.0 else float("nan")
    return CompositeStats(
        mean=mean,
        volatility=volatility,
        cv_sq=volatility / msq,
        theta=theta,
        phi=phi,
        psi=psi,
    )


def profit_stats(
    sales: Sequence[float],
    expenses: Sequence[float],
    corr_se: float | None = None,
    *,
    sales_label: str = "sales",
    expenses_label: str = "expenses",
) -> CompositeStats:
    """Profit = total sales − total expenses, as a two-component composite.

    Coefficients are the deal counts (+K_sales, −K_expenses) applied to the
    per-deal means, so the composite mean is exactly total minus total.
    When ``corr_se`` is omitted, the co-variation is estimated from the two
    sequences paired index-by-index, which requires equal lengths; with
    unequal deal counts the caller must supply ``corr_se`` explicitly.
    """
    from .moments import cross_correlation, moment, volatility as series_vol

    s = np.asarray(sales, dtype=np.float64)
    e = np.asarray(expenses, dtype=np.float64)
    if s.size == 0 or e.size == 0:
        raise IncompleteSpecError("sales and expenses must both be nonempty")
    if corr_se is None:
        if s.size != e.size:
            raise IncompleteSpecError(
                f"cannot pair {s.size} sales with {e.size} expenses; "
                "supply corr_se explicitly for unequal deal counts"
            )
        corr_se = cross_correlation(s, e)
    comps = [
        ComponentStat(sales_label, float(s.size), moment(s, 1), series_vol(s)),
        ComponentStat(expenses_label, -float(e.size), moment(e, 1), series_vol(e)),
    ]
    corr = CorrelationMatrix({(sales_label, expenses_label): float(corr_se)})
    return composite_stats(comps, corr)


_ORACLE_BATCH = 1 << 17


def monte_carlo_composite_oracle(
    components: Sequence[ComponentStat],
    corr: CorrelationMatrix,
    draws: int,
    seed: int,
) -> MonteCarloResult:
    """Empirical mean/variance of Σβ(q)·sample(q) from a joint sampler.

    Samples are jointly Gaussian with the components' means and variances
    on the diagonal and the supplied pairwise co-variations off it — the
    sampler therefore matches the specified first two moments and
    covariances exactly, which is all the analytic variance depends on.
    Batches use seeds derived deterministically from the root seed, so the
    result is reproducible and independent of batch scheduling.
    """
    comps = _check_components(components)
    if draws < 10_000:
        raise ValueError(f"oracle needs at least 10_000 draws, got {draws}")
    d = len(comps)
    mu = np.array([c.mean for c in comps])
    beta = np.array([c.beta for c in comps])
    cov = np.zeros((d, d))
    for i, c in enumerate(comps):
        cov[i, i] = c.volatility
    for i, cq in enumerate(comps):
        for j in range(i + 1, d):
            ck = comps[j]
            cov[i, j] = cov[j, i] = corr.get(cq.label, ck.label)

    evals, evecs = np.linalg.eigh(cov)
    floor = -1e-12 * max(1.0, float(evals[-1]))
    if evals[0] < floor:
        raise InfeasibleSpecError(
            f"co-variation matrix is not positive semidefinite "
            f"(smallest eigenvalue {evals[0]})"
        )
    factor = evecs * np.sqrt(np.clip(evals, 0.0, None))

    base = float(np.dot(beta, mu))
    n = 0
    mean = 0.0
    m2 = 0.0
    done = 0
    batch_index = 0
    while done < draws:
        m = min(_ORACLE_BATCH, draws - done)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(batch_index,))
        )
        z = rng.standard_normal((m, d))
        samples = base + z @ (factor.T @ beta)
        b_mean = float(np.mean(samples))
        dev = samples - b_mean
        b_m2 = float(np.sum(dev * dev))
        delta = b_mean - mean
        total = n + m
        mean += delta * m / total
        m2 += b_m2 + delta * delta * n * m / total
        n = total
        done += m
        batch_index += 1
    return MonteCarloResult(sample_mean=mean, sample_variance=m2 / n, draws=n)
