"""Core tick and averaging-window types plus tumbling-window partitioning.

Bulk tick storage is array-based: a :class:`WindowSeries` holds parallel
read-only numpy arrays, while :class:`TradeTick` is the per-deal record used
at API edges. Every estimator in the package runs over one window at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyWindowError, InvalidTickError, UnsortedInputError

__all__ = [
    "TradeTick",
    "WindowSpec",
    "WindowSeries",
    "price_of",
    "partition",
    "partition_arrays",
    "TumblingPartitioner",
]


@dataclass(frozen=True)
class TradeTick:
    """One market deal: the money paid, the quantity exchanged, and when.

    ``volume`` must be strictly positive so the deal price ``value / volume``
    is always defined.
    """

    time: float
    value: float
    volume: float

    def __post_init__(self):
        if not (
            math.isfinite(self.time)
            and math.isfinite(self.value)
            and math.isfinite(self.volume)
        ):
            raise InvalidTickError(
                f"tick fields must be finite, got time={self.time}, "
                f"value={self.value}, volume={self.volume}"
            )
        if self.volume <= 0:
            raise InvalidTickError(
                f"tick volume must be > 0 so the price is defined, got {self.volume}"
            )

    @property
    def price(self) -> float:
        """Money paid per unit of the asset."""
        return self.value / self.volume


def price_of(tick) -> float:
    """Price of one deal (value per unit volume).

    Accepts any object with ``value`` and ``volume`` attributes; rejects
    nonpositive volume.
    """
    if tick.volume <= 0:
        raise InvalidTickError(f"price undefined for volume {tick.volume}")
    return tick.value / tick.volume


@dataclass(frozen=True)
class WindowSpec:
    """Half-open averaging interval ``[center - width/2, center + width/2)``."""

    center: float
    width: float

    def __post_init__(self):
        if not (math.isfinite(self.width) and self.width > 0):
            raise ValueError(f"window width must be positive and finite, got {self.width}")
        if not math.isfinite(self.center):
            raise ValueError(f"window center must be finite, got {self.center}")

    @property
    def lo(self) -> float:
        return self.center - self.width / 2

    @property
    def hi(self) -> float:
        return self.center + self.width / 2

    def contains(self, time: float) -> bool:
        """Half-open membership: ``lo <= time < hi``."""
        return self.lo <= time < self.hi


class WindowSeries:
    """All ticks inside one averaging window, stored as parallel arrays.

    Immutable after construction (the arrays are locked); a window always
    holds at least one tick, times are nondecreasing, and every tick lies
    inside the window interval.
    """

    __slots__ = ("spec", "times", "values", "volumes")

    def __init__(self, spec: WindowSpec, times, values, volumes):
        times = _freeze(np.asarray(times, dtype=np.float64))
        values = _freeze(np.asarray(values, dtype=np.float64))
        volumes = _freeze(np.asarray(volumes, dtype=np.float64))
        if not (times.ndim == values.ndim == volumes.ndim == 1):
            raise ValueError("tick arrays must be one-dimensional")
        if not (times.size == values.size == volumes.size):
            raise ValueError("tick arrays must have equal length")
        if times.size == 0:
            raise EmptyWindowError("a window must contain at least one tick")
        _validate_tick_arrays(times, values, volumes)
        bad = np.flatnonzero(np.diff(times) < 0)
        if bad.size:
            raise UnsortedInputError(int(bad[0]) + 1)
        lo, hi = spec.lo, spec.hi
        # One-ulp slack guards against last-place disagreement between the
        # boundary arithmetic used by partition() and center +/- width/2.
        slack = 2.0 * max(np.spacing(abs(lo)), np.spacing(abs(hi)))
        if times[0] < lo - slack or times[-1] >= hi + slack:
            raise ValueError(
                f"tick times [{times[0]}, {times[-1]}] fall outside window "
                f"[{lo}, {hi})"
            )
        self.spec = spec
        self.times = times
        self.values = values
        self.volumes = volumes

    @classmethod
    def from_ticks(cls, spec: WindowSpec, ticks: Iterable[TradeTick]) -> "WindowSeries":
        ticks = list(ticks)
        return cls(
            spec,
            [t.time for t in ticks],
            [t.value for t in ticks],
            [t.volume for t in ticks],
        )

    def __len__(self) -> int:
        return self.times.size

    def __iter__(self) -> Iterator[TradeTick]:
        return iter(self.ticks)

    @property
    def ticks(self) -> tuple[TradeTick, ...]:
        """Materialize the window content as per-deal records."""
        return tuple(
            TradeTick(float(t), float(c), float(u))
            for t, c, u in zip(self.times, self.values, self.volumes)
        )

    @property
    def prices(self) -> np.ndarray:
        """Per-tick prices value/volume."""
        return self.values / self.volumes

    def __repr__(self) -> str:
        return (
            f"WindowSeries(center={self.spec.center}, width={self.spec.width}, "
            f"n={len(self)})"
        )


def _freeze(a: np.ndarray) -> np.ndarray:
    """Read-only copy unless the array is already locked (partition slices are)."""
    if a.flags.writeable:
        a = a.copy()
        a.flags.writeable = False
    return a


def _locked_view(a: np.ndarray) -> np.ndarray:
    v = a.view()
    v.flags.writeable = False
    return v


def _validate_tick_arrays(times, values, volumes) -> None:
    for name, arr in (("time", times), ("value", values), ("volume", volumes)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise InvalidTickError(
                f"non-finite {name} at index {int(bad[0])}: {arr[bad[0]]}"
            )
    bad = np.flatnonzero(volumes <= 0)
    if bad.size:
        raise InvalidTickError(
            f"volume must be > 0, got {volumes[bad[0]]} at index {int(bad[0])}"
        )


def partition(
    ticks: Sequence[TradeTick], width: float, origin: float = 0.0
) -> list[WindowSeries]:
    """Split a time-sorted tick sequence into tumbling windows.

    Windows tile the line anchored at ``origin``: the k-th window covers
    ``[origin + k*width, origin + (k+1)*width)`` and is centered at
    ``origin + (k + 0.5)*width``. Every tick lands in exactly one window;
    empty windows are omitted.
    """
    ticks = list(ticks)
    times = np.array([t.time for t in ticks], dtype=np.float64)
    values = np.array([t.value for t in ticks], dtype=np.float64)
    volumes = np.array([t.volume for t in ticks], dtype=np.float64)
    return partition_arrays(times, values, volumes, width, origin)


def partition_arrays(
    times, values, volumes, width: float, origin: float = 0.0
) -> list[WindowSeries]:
    """Array-based variant of :func:`partition` for bulk streams."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    volumes = np.ascontiguousarray(volumes, dtype=np.float64)
    if not (times.size == values.size == volumes.size):
        raise ValueError("tick arrays must have equal length")
    if not (math.isfinite(width) and width > 0):
        raise ValueError(f"window width must be positive and finite, got {width}")
    if times.size == 0:
        return []
    bad = np.flatnonzero(np.diff(times) < 0)
    if bad.size:
        raise UnsortedInputError(int(bad[0]) + 1)
    _validate_tick_arrays(times, values, volumes)

    idx = _window_indices(times, width, origin)
    # slice from read-only views so windows share storage without copies
    times, values, volumes = (_locked_view(a) for a in (times, values, volumes))
    splits = np.flatnonzero(np.diff(idx)) + 1
    starts = np.concatenate(([0], splits))
    ends = np.concatenate((splits, [times.size]))
    windows = []
    for s, e in zip(starts, ends):
        k = int(idx[s])
        spec = WindowSpec(center=origin + (k + 0.5) * width, width=width)
        windows.append(WindowSeries(spec, times[s:e], values[s:e], volumes[s:e]))
    return windows


def _window_indices(times: np.ndarray, width: float, origin: float) -> np.ndarray:
    """Window index of each tick under half-open boundaries origin + k*width."""
    k = np.floor((times - origin) / width).astype(np.int64)
    # floor() of the rounded quotient can miss the exact boundary by one slot
    k -= times < origin + k * width
    k += times >= origin + (k + 1) * width
    if np.any(times < origin + k * width) or np.any(times >= origin + (k + 1) * width):
        raise AssertionError("window index assignment failed to converge")
    return k


class TumblingPartitioner:
    """Incremental tumbling-window partitioner for chunked streams.

    Feed sorted tick chunks with :meth:`push`; windows are emitted once a
    later window has started, so each window is complete when yielded. Call
    :meth:`finish` to flush the final window. The emitted windows are
    identical to a one-shot :func:`partition_arrays` over the concatenated
    input.
    """

    def __init__(self, width: float, origin: float = 0.0):
        if not (math.isfinite(width) and width > 0):
            raise ValueError(f"window width must be positive and finite, got {width}")
        self.width = width
        self.origin = origin
        self._carry: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._consumed = 0  # ticks fully processed before the carry buffer

    def push(self, times, values, volumes) -> list[WindowSeries]:
        times = np.ascontiguousarray(times, dtype=np.float64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        volumes = np.ascontiguousarray(volumes, dtype=np.float64)
        if times.size == 0:
            return []
        _validate_tick_arrays(times, values, volumes)
        bad = np.flatnonzero(np.diff(times) < 0)
        offset = self._consumed + (self._carry[0].size if self._carry else 0)
        if bad.size:
            raise UnsortedInputError(offset + int(bad[0]) + 1)
        if self._carry is not None:
            if times[0] < self._carry[0][-1]:
                raise UnsortedInputError(offset)
            times = np.concatenate((self._carry[0], times))
            values = np.concatenate((self._carry[1], values))
            volumes = np.concatenate((self._carry[2], volumes))

        idx = _window_indices(times, self.width, self.origin)
        # hold back the still-open trailing window
        cut = int(np.searchsorted(idx, idx[-1]))
        done_t, done_v, done_u = times[:cut], values[:cut], volumes[:cut]
        self._carry = (times[cut:], values[cut:], volumes[cut:])
        self._consumed += cut
        if cut == 0:
            return []
        return partition_arrays(done_t, done_v, done_u, self.width, self.origin)

    @property
    def pending_start(self) -> float | None:
        """Time of the earliest tick still held in the open window."""
        if self._carry is None or self._carry[0].size == 0:
            return None
        return float(self._carry[0][0])

    def finish(self) -> list[WindowSeries]:
        if self._carry is None or self._carry[0].size == 0:
            self._carry = None
            return []
        times, values, volumes = self._carry
        self._carry = None
        self._consumed += times.size
        return partition_arrays(times, values, volumes, self.width, self.origin)
