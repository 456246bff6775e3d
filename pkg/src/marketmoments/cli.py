"""Command-line frontend: ingest ticks, run the estimators, emit reports.

Subcommands:

* ``analyze``   — windowed moments + price statistics (both computation
  paths and their gap), optional return statistics at a lag.
* ``returns``   — ``analyze`` with the lag mandatory.
* ``aggregate`` — multi-agent deal pools per window with the CV-transfer
  check.
* ``composite`` — linear-combination variable from a spec document,
  optionally cross-checked against the Monte-Carlo oracle.
* ``simulate``  — reproducible synthetic tick stream plus seed sidecar.
* ``check``     — validate a data file without computing.

Exit codes: 0 success, 2 usage, 3 data problems, 4 degeneracy under
``--strict``. Reports are canonical JSON, one file per window, so repeated
runs over the same data are byte-identical regardless of ``--threads``.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ._version import REPORT_SCHEMA_VERSION, __version__
from .composite import composite_stats, monte_carlo_composite_oracle
from .errors import (
    DataError,
    DegeneracyError,
    EmptyLaggedWindowError,
    UndefinedCVError,
)
from .gaussian import gaussian_from_stats, gaussian_gap
from .macro import aggregate, cv_transfer_check, pool_from_arrays
from .moments import window_moments
from .price import price_stats_closed_form, price_stats_direct
from .returns import build_lagged_arrays, return_stats_closed_form, return_stats_direct
from .synth import GENERATOR_ID, SHARD_SIZE, iter_generated_chunks
from .ticks import TumblingPartitioner, WindowSeries, _window_indices, WindowSpec
from .tickio import (
    AnalysisReport,
    canonical_json,
    iter_tick_chunks,
    load_composite_spec,
    load_genspec,
    write_report,
    write_ticks,
)

__all__ = ["main", "entrypoint", "parse_duration"]

ENV_THREADS = "MARKETMOMENTS_THREADS"

_DURATION_UNITS = {"ms": 1e-3, "s": 1.0, "m": 60.0, "h": 3600.0, "d": 86400.0}


def parse_duration(text: str) -> float:
    """'250ms' | '1.5s' | '2m' | '1h' | '1d' | bare seconds -> seconds."""
    raw = text.strip().lower()
    unit = 1.0
    for suffix in sorted(_DURATION_UNITS, key=len, reverse=True):
        if raw.endswith(suffix):
            unit = _DURATION_UNITS[suffix]
            raw = raw[: -len(suffix)]
            break
    try:
        seconds = float(raw) * unit
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"cannot parse duration {text!r}; use e.g. 250ms, 1.5s, 2m, 1h"
        ) from None
    if not (math.isfinite(seconds) and seconds > 0):
        raise argparse.ArgumentTypeError(f"duration must be positive, got {text!r}")
    return seconds


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def _default_threads() -> int:
    raw = os.environ.get(ENV_THREADS, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marketmoments",
        description="Windowed trade-tick analytics: weighted moments, "
        "volatilities, CVs, and two-moment Gaussian forecast ceilings.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"marketmoments {__version__} (report schema {REPORT_SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_output=True):
        p.add_argument("--strict", action="store_true",
                       help="turn degeneracy warnings into exit code 4")
        if needs_output:
            p.add_argument("--output", required=True,
                           help="directory (one JSON report per window)")

    def add_window_flags(p):
        p.add_argument("--window", required=True, type=parse_duration,
                       metavar="DUR", help="tumbling window width, e.g. 1s")
        p.add_argument("--origin", type=float, default=0.0,
                       help="window tiling origin in seconds (default 0)")

    p_an = sub.add_parser("analyze", help="windowed price statistics")
    p_an.add_argument("input", help="tick file (CSV or JSONL)")
    add_window_flags(p_an)
    p_an.add_argument("--lag", type=parse_duration, metavar="DUR",
                      help="also compute return statistics at this lag")
    p_an.add_argument("--schema", choices=("value", "price"),
                      help="force the input column schema")
    p_an.add_argument("--gap", action="store_true",
                      help="report the Gaussian-gap metrics per window "
                           "(retains per-window samples)")
    p_an.add_argument("--threads", type=_positive_int, default=None,
                      help=f"worker threads (default ${ENV_THREADS} or 1)")
    p_an.add_argument("--chunk-rows", type=_positive_int, default=1_000_000,
                      help="ingestion chunk size in rows")
    add_common(p_an)
    p_an.set_defaults(func=cmd_analyze)

    p_re = sub.add_parser("returns", help="windowed return statistics (lag required)")
    p_re.add_argument("input")
    add_window_flags(p_re)
    p_re.add_argument("--lag", type=parse_duration, metavar="DUR", required=True)
    p_re.add_argument("--schema", choices=("value", "price"))
    p_re.add_argument("--gap", action="store_true")
    p_re.add_argument("--threads", type=_positive_int, default=None)
    p_re.add_argument("--chunk-rows", type=_positive_int, default=1_000_000)
    add_common(p_re)
    p_re.set_defaults(func=cmd_analyze)

    p_ag = sub.add_parser("aggregate", help="multi-agent deal-pool statistics")
    p_ag.add_argument("input", help="deal file (agent,time,value)")
    add_window_flags(p_ag)
    add_common(p_ag)
    p_ag.set_defaults(func=cmd_aggregate)

    p_co = sub.add_parser("composite", help="linear-combination variable")
    p_co.add_argument("--spec", required=True, help="composite spec JSON")
    p_co.add_argument("--output", required=True, help="report file path")
    p_co.add_argument("--strict", action="store_true")
    p_co.set_defaults(func=cmd_composite)

    p_si = sub.add_parser("simulate", help="generate a synthetic tick stream")
    p_si.add_argument("--genspec", required=True, help="generator spec JSON")
    p_si.add_argument("--seed", type=int, default=None,
                      help="override the spec's seed")
    p_si.add_argument("--output", required=True, help="tick CSV to write")
    p_si.set_defaults(func=cmd_simulate)

    p_ch = sub.add_parser("check", help="validate a data file without computing")
    p_ch.add_argument("input")
    p_ch.add_argument("--schema", choices=("value", "price"))
    p_ch.add_argument("--kind", choices=("ticks", "deals"), default="ticks")
    p_ch.set_defaults(func=cmd_check)

    return parser


# --- analyze / returns ------------------------------------------------------


class _History:
    """Sliding buffer of (time, price) used to resolve lagged past prices."""

    def __init__(self):
        self.times = np.empty(0, dtype=np.float64)
        self.prices = np.empty(0, dtype=np.float64)

    def append(self, times: np.ndarray, values: np.ndarray, volumes: np.ndarray):
        self.times = np.concatenate((self.times, times))
        self.prices = np.concatenate((self.prices, values / volumes))

    def prune(self, min_query: float):
        # keep the newest entry at or before every possible future query
        keep_from = int(np.searchsorted(self.times, min_query, side="right")) - 1
        if keep_from > 0:
            self.times = self.times[keep_from:]
            self.prices = self.prices[keep_from:]


def _rounding_floor(volatility: float, scale: float) -> float:
    """Clamp a rounding-noise negative variance to zero; keep real ones."""
    if volatility < 0.0 and volatility >= -1e-12 * max(abs(scale), 1e-300):
        return 0.0
    return volatility


def _window_report(window: WindowSeries, args, history: _History | None
                   ) -> AnalysisReport:
    moments = window_moments(window)
    direct = price_stats_direct(window)
    closed = price_stats_closed_form(moments)
    warnings: list[str] = []

    report = AnalysisReport(
        kind=args.command,
        window=window.spec,
        n_ticks=len(window),
        moments=moments,
        price_direct=direct,
        price_closed_form=closed,
        price_path_gap=abs(direct.volatility - closed.volatility),
    )

    gaussians = {
        "price": gaussian_from_stats(
            direct.mean, _rounding_floor(direct.volatility, direct.second_moment)
        )
    }
    if math.isnan(direct.cv_sq):
        warnings.append("price CV undefined: mean price is zero")

    lag = getattr(args, "lag", None)
    if lag is not None:
        report.lag = lag
        try:
            lagged = build_lagged_arrays(window, history.times, history.prices, lag)
            r_direct = return_stats_direct(lagged)
            r_closed = return_stats_closed_form(lagged)
            report.returns_direct = r_direct
            report.returns_closed_form = r_closed
            report.returns_path_gap = abs(r_direct.volatility - r_closed.volatility)
            report.n_unresolved = lagged.unresolved
            gaussians["return"] = gaussian_from_stats(
                r_direct.mean,
                _rounding_floor(r_direct.volatility, r_direct.second_moment),
            )
            if math.isnan(r_direct.cv_sq):
                warnings.append("return CV undefined: mean return is zero")
        except EmptyLaggedWindowError as exc:
            if args.strict:
                raise
            report.n_unresolved = len(window)
            warnings.append(f"return section empty: {exc}")

    report.gaussians = gaussians
    if args.gap and len(window) >= 2:
        report.gap = gaussian_gap(window.prices, gaussians["price"])
    report.warnings = tuple(warnings)
    if args.strict and warnings:
        raise UndefinedCVError("; ".join(warnings))
    return report


def _seed_provenance(input_path: str) -> dict | None:
    meta = Path(str(input_path) + ".meta.json")
    if not meta.is_file():
        return None
    import json

    try:
        with open(meta, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, ValueError):
        return None
    return doc if isinstance(doc, dict) else None


def cmd_analyze(args) -> int:
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    threads = args.threads if args.threads is not None else _default_threads()
    provenance = _seed_provenance(args.input)

    partitioner = TumblingPartitioner(args.window, args.origin)
    history = _History() if args.lag is not None else None
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    n_windows = 0
    n_ticks = 0
    try:
        def emit(windows: list[WindowSeries]):
            nonlocal n_windows
            if not windows:
                return
            make = lambda w: _window_report(w, args, history)
            reports = list(pool.map(make, windows)) if pool else [make(w) for w in windows]
            for rep in reports:
                rep.seed_provenance = provenance
                write_report(rep, outdir / f"window_{n_windows:06d}.json")
                n_windows += 1

        for times, values, volumes in iter_tick_chunks(
            args.input, schema=args.schema, chunk_rows=args.chunk_rows
        ):
            n_ticks += times.size
            if history is not None:
                history.append(times, values, volumes)
            emit(partitioner.push(times, values, volumes))
            if history is not None and times.size:
                # earliest tick a future window can contain bounds the
                # oldest past-price query that can still occur
                earliest = partitioner.pending_start
                if earliest is None:
                    earliest = float(times[-1])
                history.prune(earliest - args.lag)
        emit(partitioner.finish())
    finally:
        if pool:
            pool.shutdown()

    if n_ticks == 0:
        print("error: no ticks in input", file=sys.stderr)
        return 3
    print(f"wrote {n_windows} window report(s) to {outdir}")
    return 0


# --- aggregate ----------------------------------------------------------------


def cmd_aggregate(args) -> int:
    from .tickio import read_deals

    agents, times, values = read_deals(args.input)
    if len(agents) == 0:
        print("error: no deals in input", file=sys.stderr)
        return 3
    order = np.argsort(times, kind="stable")
    times = times[order]
    values = values[order]
    agents = [agents[i] for i in order]

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    idx = _window_indices(times, args.window, args.origin)
    splits = np.flatnonzero(np.diff(idx)) + 1
    starts = np.concatenate(([0], splits))
    ends = np.concatenate((splits, [times.size]))

    n_windows = 0
    for s, e in zip(starts, ends):
        k = int(idx[s])
        spec = WindowSpec(center=args.origin + (k + 0.5) * args.window,
                          width=args.window)
        pool = pool_from_arrays(agents[s:e], times[s:e], values[s:e], spec)
        stats = aggregate(pool)
        warnings: list[str] = []
        transfer = None
        try:
            transfer = cv_transfer_check(pool)
        except UndefinedCVError as exc:
            if args.strict:
                raise
            warnings.append(str(exc))
        report = AnalysisReport(
            kind="aggregate",
            window=spec,
            n_ticks=len(pool),
            aggregate=stats,
            cv_transfer=transfer,
            gaussians={
                "aggregate": gaussian_from_stats(
                    stats.agg_mean,
                    _rounding_floor(stats.agg_volatility, stats.total_second),
                )
            },
            warnings=tuple(warnings),
        )
        write_report(report, outdir / f"window_{n_windows:06d}.json")
        n_windows += 1
    print(f"wrote {n_windows} window report(s) to {outdir}")
    return 0


# --- composite ----------------------------------------------------------------


def cmd_composite(args) -> int:
    components, corr, oracle_cfg = load_composite_spec(args.spec)
    warnings: list[str] = []
    stats = None
    oracle = None
    gaussians = None
    try:
        stats = composite_stats(components, corr)
        gaussians = {
            "composite": gaussian_from_stats(
                stats.mean, _rounding_floor(stats.volatility, stats.mean * stats.mean)
            )
        }
    except UndefinedCVError as exc:
        if args.strict:
            raise
        warnings.append(str(exc))
    if stats is not None and oracle_cfg is not None:
        oracle = monte_carlo_composite_oracle(
            components, corr, draws=oracle_cfg["draws"], seed=oracle_cfg["seed"]
        )
    report = AnalysisReport(
        kind="composite",
        composite=stats,
        oracle=oracle,
        gaussians=gaussians,
        warnings=tuple(warnings),
    )
    write_report(report, args.output)
    print(f"wrote composite report to {args.output}")
    return 0


# --- simulate -----------------------------------------------------------------


def cmd_simulate(args) -> int:
    spec = load_genspec(args.genspec, seed_override=args.seed)
    n = write_ticks(args.output, iter_generated_chunks(spec, chunk=SHARD_SIZE))
    meta = {
        "engine_version": __version__,
        "generator": GENERATOR_ID,
        "seed": spec.seed,
        "genspec": {
            "n_ticks": spec.n_ticks,
            "time_step": spec.time_step,
            "target_corr_cu": spec.target_corr_cu,
            "value_dist": _dist_doc(spec.value_dist),
            "volume_dist": _dist_doc(spec.volume_dist),
        },
    }
    meta_path = str(args.output) + ".meta.json"
    with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(canonical_json(meta))
    print(f"wrote {n} ticks to {args.output} (+ {meta_path})")
    return 0


def _dist_doc(dist) -> dict:
    doc = {"kind": type(dist).__name__.lower()}
    doc.update(dataclasses.asdict(dist))
    return doc


# --- check --------------------------------------------------------------------


def cmd_check(args) -> int:
    if args.kind == "deals":
        from .tickio import read_deals

        agents, times, values = read_deals(args.input)
        span = f"[{times.min()}, {times.max()}]" if times.size else "[]"
        print(f"ok: {len(agents)} deal(s), {len(set(agents))} agent(s), span {span}")
        return 0
    n = 0
    lo = math.inf
    hi = -math.inf
    for times, _values, _volumes in iter_tick_chunks(args.input, schema=args.schema):
        n += times.size
        if times.size:
            lo = min(lo, float(times[0]))
            hi = max(hi, float(times[-1]))
    span = f"[{lo}, {hi}]" if n else "[]"
    print(f"ok: {n} tick(s), span {span}")
    return 0


# --- entry --------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegeneracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4 if getattr(args, "strict", False) else 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
