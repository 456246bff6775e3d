"""File interchange: tick/deal ingestion, spec documents, JSON reports.

Ticks travel as CSV (header ``time,value,volume`` or ``time,price,volumes``
— see docs/formats.md) or as JSONL with the same keys. Reports are
canonical JSON: sorted keys, two-space indent, shortest round-trip float
strings, non-finite numbers replaced by explicit degenerate markers — so
identical analyses produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass
from typing import Any, Iterator, Sequence

import numpy as np
import pandas as pd

from ._version import REPORT_SCHEMA_VERSION, __version__
from .composite import (
    ComponentStat,
    CompositeStats,
    CorrelationMatrix,
    MonteCarloResult,
)
from .errors import IncompleteSpecError, IngestError, SchemaError
from .gaussian import GaussianApprox, GaussianGap
from .macro import AggregateStats, CvTransfer
from .moments import MomentSet, cross_correlation, moment, volatility
from .price import PriceStats
from .returns import ReturnStats
from .synth import Constant, Gamma, GenSpec, Lognormal, Marginal
from .ticks import TradeTick, WindowSpec

__all__ = [
    "TICK_SCHEMAS",
    "read_ticks",
    "iter_tick_chunks",
    "write_ticks",
    "read_deals",
    "AnalysisReport",
    "write_report",
    "canonical_json",
    "load_composite_spec",
    "load_genspec",
    "REPORT_SCHEMA_VERSION",
]

TICK_SCHEMAS = {
    "value": ("time", "value", "volume"),
    "price": ("time", "price", "volume"),
}

DEAL_COLUMNS = ("agent", "time", "value")


# --- helpers ----------------------------------------------------------------


def _open_maybe(source, mode="r"):
    """(file object, should_close, display name)"""
    if hasattr(source, "read") or hasattr(source, "write"):
        return source, False, getattr(source, "name", "<stream>")
    return open(source, mode, encoding="utf-8", newline=""), True, str(source)


def _parse_float(text: str, column: str, line: int) -> float:
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise IngestError(f"column {column!r}: cannot parse {text!r} as a number",
                          line=line) from None
    if not math.isfinite(x):
        raise IngestError(f"column {column!r}: non-finite value {text!r}", line=line)
    return x


def _schema_of_fields(fields: Sequence[str], line: int) -> str:
    normalized = tuple(f.strip().lower() for f in fields)
    for name, cols in TICK_SCHEMAS.items():
        if normalized == cols:
            return name
    raise SchemaError(
        f"unrecognized tick columns {list(fields)}; expected "
        f"{list(TICK_SCHEMAS['value'])} or {list(TICK_SCHEMAS['price'])}",
        line=line,
    )


def _check_schema(found: str, requested: str | None, line: int) -> str:
    if requested is not None and requested not in TICK_SCHEMAS:
        raise ValueError(f"schema must be 'value' or 'price', got {requested!r}")
    if requested is not None and found != requested:
        raise SchemaError(
            f"file uses the {found!r} schema but {requested!r} was requested",
            line=line,
        )
    return found


def _tick_from_row(time: float, second: float, volume: float,
                   schema: str, line: int) -> TradeTick:
    if volume <= 0:
        raise IngestError(f"volume must be > 0, got {volume}", line=line)
    value = second * volume if schema == "price" else second
    return TradeTick(time=time, value=value, volume=volume)


# --- tick readers -----------------------------------------------------------


def read_ticks(source, schema: str | None = None) -> list[TradeTick]:
    """Parse a CSV or JSONL tick file into records, in file order.

    ``schema`` may force ``"value"`` or ``"price"``; by default it is
    inferred from the header (CSV) or the first object's keys (JSONL).
    Errors carry 1-based line numbers.
    """
    fh, should_close, _name = _open_maybe(source)
    try:
        first = fh.readline()
        if first.lstrip().startswith("{"):
            return _read_ticks_jsonl(first, fh, schema)
        return _read_ticks_csv(first, fh, schema)
    finally:
        if should_close:
            fh.close()


def _read_ticks_csv(header_line: str, fh, schema: str | None) -> list[TradeTick]:
    import csv

    if header_line == "":
        return []
    header = next(csv.reader([header_line]))
    found = _check_schema(_schema_of_fields(header, line=1), schema, line=1)
    cols = TICK_SCHEMAS[found]
    ticks = []
    for line_no, row in enumerate(csv.reader(fh), start=2):
        if not row:
            continue
        if len(row) != 3:
            raise IngestError(f"expected 3 columns, got {len(row)}", line=line_no)
        t = _parse_float(row[0], cols[0], line_no)
        x = _parse_float(row[1], cols[1], line_no)
        u = _parse_float(row[2], cols[2], line_no)
        ticks.append(_tick_from_row(t, x, u, found, line_no))
    return ticks


def _read_ticks_jsonl(first_line: str, fh, schema: str | None) -> list[TradeTick]:
    ticks = []
    found = None
    for line_no, line in enumerate(_chain_lines(first_line, fh), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid JSON: {exc.msg}", line=line_no) from None
        if not isinstance(obj, dict):
            raise IngestError("each JSONL line must be an object", line=line_no)
        keys = tuple(sorted(obj.keys()))
        if keys == tuple(sorted(TICK_SCHEMAS["value"])):
            row_schema = "value"
        elif keys == tuple(sorted(TICK_SCHEMAS["price"])):
            row_schema = "price"
        else:
            raise SchemaError(f"unrecognized tick keys {sorted(obj)}", line=line_no)
        if found is None:
            found = _check_schema(row_schema, schema, line=line_no)
        elif row_schema != found:
            raise SchemaError(
                f"mixed schemas: file started as {found!r} but this row "
                f"is {row_schema!r}",
                line=line_no,
            )
        cols = TICK_SCHEMAS[found]
        t = _parse_float(obj[cols[0]], cols[0], line_no)
        x = _parse_float(obj[cols[1]], cols[1], line_no)
        u = _parse_float(obj[cols[2]], cols[2], line_no)
        ticks.append(_tick_from_row(t, x, u, found, line_no))
    return ticks


def _chain_lines(first: str, fh) -> Iterator[str]:
    if first:
        yield first
    yield from fh


def iter_tick_chunks(
    path, schema: str | None = None, chunk_rows: int = 1_000_000
) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Stream (times, values, volumes) arrays from a tick file.

    This is the bulk path: floats are parsed with the round-trip parser so
    the values match :func:`read_ticks` exactly, but rows never become
    per-tick objects. Yields chunks of at most ``chunk_rows``.
    """
    path = os.fspath(path)
    if path.endswith((".jsonl", ".ndjson")):
        yield from _iter_chunks_jsonl(path, schema, chunk_rows)
        return

    with open(path, "r", encoding="utf-8", newline="") as probe:
        header_line = probe.readline()
    if header_line == "":
        return
    import csv

    header = next(csv.reader([header_line]))
    found = _check_schema(_schema_of_fields(header, line=1), schema, line=1)
    cols = TICK_SCHEMAS[found]

    row_offset = 2  # first data row of the file
    try:
        reader = pd.read_csv(
            path,
            chunksize=chunk_rows,
            dtype=np.float64,
            float_precision="round_trip",
        )
        for frame in reader:
            if tuple(frame.columns) != cols:
                raise SchemaError(f"unexpected columns {list(frame.columns)}", line=1)
            times = frame[cols[0]].to_numpy()
            second = frame[cols[1]].to_numpy()
            volumes = frame[cols[2]].to_numpy()
            _validate_chunk(times, second, volumes, cols, row_offset)
            values = second * volumes if found == "price" else second
            yield times, values, volumes
            row_offset += len(frame)
    except (ValueError, pd.errors.ParserError):
        # pandas cannot tell us the offending line; the strict reader can
        read_ticks(path, schema=found)
        raise


def _iter_chunks_jsonl(path, schema, chunk_rows):
    row_offset = 1
    found = schema
    reader = pd.read_json(path, lines=True, chunksize=chunk_rows)
    for frame in reader:
        keys = tuple(sorted(str(c) for c in frame.columns))
        if keys == tuple(sorted(TICK_SCHEMAS["value"])):
            row_schema = "value"
        elif keys == tuple(sorted(TICK_SCHEMAS["price"])):
            row_schema = "price"
        else:
            raise SchemaError(f"unrecognized tick keys {sorted(frame.columns)}",
                              line=row_offset)
        if found is None:
            found = row_schema
        elif row_schema != found:
            raise SchemaError("mixed schemas in JSONL input", line=row_offset)
        cols = TICK_SCHEMAS[found]
        if frame[list(cols)].isna().any().any():
            read_ticks(path, schema=schema)
            raise IngestError("missing or mixed keys in JSONL input", line=row_offset)
        times = frame[cols[0]].to_numpy(dtype=np.float64)
        second = frame[cols[1]].to_numpy(dtype=np.float64)
        volumes = frame[cols[2]].to_numpy(dtype=np.float64)
        _validate_chunk(times, second, volumes, cols, row_offset)
        values = second * volumes if found == "price" else second
        yield times, values, volumes
        row_offset += len(frame)


def _validate_chunk(times, second, volumes, cols, row_offset) -> None:
    for name, arr in zip(cols, (times, second, volumes)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise IngestError(
                f"column {name!r}: non-finite value {arr[bad[0]]}",
                line=row_offset + int(bad[0]),
            )
    bad = np.flatnonzero(volumes <= 0)
    if bad.size:
        raise IngestError(
            f"volume must be > 0, got {volumes[bad[0]]}",
            line=row_offset + int(bad[0]),
        )


# --- tick writer ------------------------------------------------------------


def write_ticks(path, ticks, schema: str = "value") -> int:
    """Write ticks as CSV with shortest round-trip float formatting.

    ``ticks`` may be a sequence of :class:`TradeTick`, one
    ``(times, values, volumes)`` array triple, or an iterable of such
    triples (streamed). Returns the number of rows written.
    """
    if schema not in TICK_SCHEMAS:
        raise ValueError(f"schema must be 'value' or 'price', got {schema!r}")
    chunks = _coerce_tick_chunks(ticks)
    cols = TICK_SCHEMAS[schema]
    total = 0
    fh, should_close, name = _open_maybe(path, mode="w")
    try:
        fh.write(",".join(cols) + "\n")
        for times, values, volumes in chunks:
            second = values / volumes if schema == "price" else values
            frame = pd.DataFrame(
                {cols[0]: times, cols[1]: second, cols[2]: volumes}
            )
            frame.to_csv(fh, index=False, header=False, lineterminator="\n")
            total += len(frame)
    except OSError as exc:
        raise IngestError(f"cannot write ticks to {name}: {exc}") from exc
    finally:
        if should_close:
            fh.close()
    return total


def _coerce_tick_chunks(ticks):
    if isinstance(ticks, tuple) and len(ticks) == 3:
        return [ticks]
    if isinstance(ticks, (list, Sequence)) and (
        len(ticks) == 0 or isinstance(ticks[0], TradeTick)
    ):
        times = np.array([t.time for t in ticks])
        values = np.array([t.value for t in ticks])
        volumes = np.array([t.volume for t in ticks])
        return [(times, values, volumes)]
    return ticks  # assume iterable of array triples


# --- deal reader ------------------------------------------------------------


def read_deals(source) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Parse a deals file (``agent,time,value`` CSV or JSONL equivalent)."""
    fh, should_close, _name = _open_maybe(source)
    try:
        first = fh.readline()
        if first.lstrip().startswith("{"):
            return _read_deals_jsonl(first, fh)
        return _read_deals_csv(first, fh)
    finally:
        if should_close:
            fh.close()


def _read_deals_csv(header_line: str, fh):
    import csv

    if header_line == "":
        return [], np.empty(0), np.empty(0)
    header = tuple(f.strip().lower() for f in next(csv.reader([header_line])))
    if header != DEAL_COLUMNS:
        raise SchemaError(
            f"unrecognized deal columns {list(header)}; expected {list(DEAL_COLUMNS)}",
            line=1,
        )
    agents, times, values = [], [], []
    for line_no, row in enumerate(csv.reader(fh), start=2):
        if not row:
            continue
        if len(row) != 3:
            raise IngestError(f"expected 3 columns, got {len(row)}", line=line_no)
        agents.append(row[0])
        times.append(_parse_float(row[1], "time", line_no))
        values.append(_parse_float(row[2], "value", line_no))
    return agents, np.asarray(times, dtype=np.float64), np.asarray(values, dtype=np.float64)


def _read_deals_jsonl(first_line: str, fh):
    agents, times, values = [], [], []
    for line_no, line in enumerate(_chain_lines(first_line, fh), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid JSON: {exc.msg}", line=line_no) from None
        if not isinstance(obj, dict) or set(obj) != set(DEAL_COLUMNS):
            raise SchemaError(
                f"deal objects need keys {list(DEAL_COLUMNS)}", line=line_no
            )
        agents.append(str(obj["agent"]))
        times.append(_parse_float(obj["time"], "time", line_no))
        values.append(_parse_float(obj["value"], "value", line_no))
    return agents, np.asarray(times, dtype=np.float64), np.asarray(values, dtype=np.float64)


# --- reports ----------------------------------------------------------------


@dataclass
class AnalysisReport:
    """Everything one analysis emitted, ready for canonical serialization.

    Sections are ``None`` when not requested; numeric degeneracies inside a
    present section are preserved and marked at serialization time, never
    dropped.
    """

    kind: str
    schema_version: str = REPORT_SCHEMA_VERSION
    engine_version: str = __version__
    window: WindowSpec | None = None
    n_ticks: int | None = None
    moments: MomentSet | None = None
    price_direct: PriceStats | None = None
    price_closed_form: PriceStats | None = None
    price_path_gap: float | None = None
    returns_direct: ReturnStats | None = None
    returns_closed_form: ReturnStats | None = None
    returns_path_gap: float | None = None
    lag: float | None = None
    n_unresolved: int | None = None
    aggregate: AggregateStats | None = None
    cv_transfer: CvTransfer | None = None
    composite: CompositeStats | None = None
    oracle: MonteCarloResult | None = None
    gaussians: dict[str, GaussianApprox] | None = None
    gap: GaussianGap | None = None
    seed_provenance: dict[str, Any] | None = None
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in dataclasses.fields(self):
            val = getattr(self, f.name)
            if val is None:
                continue
            out[f.name] = _jsonable(val)
        return out


def _jsonable(val):
    if isinstance(val, WindowSpec):
        return {
            "center": _jsonable(val.center),
            "width": _jsonable(val.width),
            "lo": _jsonable(val.lo),
            "hi": _jsonable(val.hi),
        }
    if isinstance(val, (MomentSet, PriceStats, ReturnStats, AggregateStats,
                        CompositeStats, GaussianApprox, ComponentStat)):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(val).items()}
    if isinstance(val, (CvTransfer, GaussianGap, MonteCarloResult)):
        return {k: _jsonable(v) for k, v in val._asdict().items()}
    if isinstance(val, dict):
        return {_key_str(k): _jsonable(v) for k, v in val.items()}
    if isinstance(val, (list, tuple)):
        return [_jsonable(v) for v in val]
    if isinstance(val, np.integer):
        return int(val)
    if isinstance(val, (float, np.floating)):
        x = float(val)
        if math.isnan(x):
            return {"degenerate": "nan"}
        if math.isinf(x):
            return {"degenerate": "inf" if x > 0 else "-inf"}
        return x
    if isinstance(val, np.ndarray):
        return [_jsonable(v) for v in val.tolist()]
    return val


def _key_str(key) -> str:
    if isinstance(key, tuple):
        return "|".join(str(k) for k in key)
    return str(key)


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, indent 2, shortest floats."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


def write_report(report: AnalysisReport, path) -> None:
    """Serialize a report as canonical JSON; identical reports are
    byte-identical files."""
    text = canonical_json(report.to_dict())
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IngestError(f"cannot write report to {path}: {exc}") from exc


# --- spec documents ---------------------------------------------------------


def _load_json_doc(source, what: str) -> dict:
    fh, should_close, name = _open_maybe(source)
    try:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise IngestError(
                f"{what} {name}: invalid JSON: {exc.msg}", line=exc.lineno
            ) from None
    finally:
        if should_close:
            fh.close()
    if not isinstance(doc, dict):
        raise SchemaError(f"{what} {name}: top level must be an object")
    return doc


def load_composite_spec(
    source,
) -> tuple[list[ComponentStat], CorrelationMatrix, dict | None]:
    """Parse a composite-variable document.

    Components carry either explicit ``mean``/``volatility`` or a raw
    ``values`` list from which both are estimated. Pairwise entries come
    from ``correlations``; with ``"estimate_correlations": true``, pairs
    of equal-length ``values`` components that lack an explicit entry are
    estimated index-paired. Returns (components, matrix, oracle config).
    """
    doc = _load_json_doc(source, "composite spec")
    raw_components = doc.get("components")
    if not isinstance(raw_components, list) or not raw_components:
        raise IncompleteSpecError("composite spec needs a nonempty 'components' list")

    components: list[ComponentStat] = []
    raw_values: dict[str, np.ndarray] = {}
    for i, item in enumerate(raw_components):
        if not isinstance(item, dict) or "label" not in item or "beta" not in item:
            raise IncompleteSpecError(
                f"component #{i}: need at least 'label' and 'beta'"
            )
        label = str(item["label"])
        beta = float(item["beta"])
        if "values" in item:
            vals = np.asarray(item["values"], dtype=np.float64)
            if vals.size == 0:
                raise IncompleteSpecError(f"component {label!r}: 'values' is empty")
            raw_values[label] = vals
            components.append(
                ComponentStat(label, beta, moment(vals, 1), volatility(vals))
            )
        elif "mean" in item and "volatility" in item:
            components.append(
                ComponentStat(label, beta, float(item["mean"]),
                              float(item["volatility"]))
            )
        else:
            raise IncompleteSpecError(
                f"component {label!r}: need 'values' or 'mean'+'volatility'"
            )

    corr = CorrelationMatrix()
    for entry in doc.get("correlations", []):
        pair = entry.get("pair") if isinstance(entry, dict) else None
        if not (isinstance(pair, list) and len(pair) == 2 and "value" in entry):
            raise IncompleteSpecError(
                "each correlation entry needs {'pair': [a, b], 'value': x}"
            )
        corr.set(str(pair[0]), str(pair[1]), float(entry["value"]))

    if doc.get("estimate_correlations", False):
        labels = [c.label for c in components]
        for i, q in enumerate(labels):
            for k in labels[i + 1:]:
                if (q, k) in corr:
                    continue
                if q in raw_values and k in raw_values \
                        and raw_values[q].size == raw_values[k].size:
                    corr.set(q, k, cross_correlation(raw_values[q], raw_values[k]))

    oracle = doc.get("oracle")
    if oracle is not None:
        if not isinstance(oracle, dict) or "draws" not in oracle:
            raise IncompleteSpecError("'oracle' needs at least a 'draws' count")
        oracle = {"draws": int(oracle["draws"]), "seed": int(oracle.get("seed", 0))}
    return components, corr, oracle


_DIST_KINDS = {
    "lognormal": (Lognormal, ("mu", "sigma")),
    "gamma": (Gamma, ("shape", "scale")),
    "constant": (Constant, ("value",)),
}


def _parse_dist(obj, where: str) -> Marginal:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError(f"{where}: distribution needs a 'kind' field")
    kind = str(obj["kind"]).lower()
    if kind not in _DIST_KINDS:
        raise SchemaError(
            f"{where}: unknown distribution kind {kind!r}; "
            f"expected one of {sorted(_DIST_KINDS)}"
        )
    cls, params = _DIST_KINDS[kind]
    missing = [p for p in params if p not in obj]
    if missing:
        raise SchemaError(f"{where}: {kind} distribution missing {missing}")
    return cls(**{p: float(obj[p]) for p in params})


def load_genspec(source, seed_override: int | None = None) -> GenSpec:
    """Parse a generator-spec document into a :class:`GenSpec`."""
    doc = _load_json_doc(source, "generator spec")
    required = ("n_ticks", "time_step", "value_dist", "volume_dist")
    missing = [k for k in required if k not in doc]
    if missing:
        raise SchemaError(f"generator spec missing fields {missing}")
    seed = seed_override if seed_override is not None else int(doc.get("seed", 0))
    return GenSpec(
        n_ticks=int(doc["n_ticks"]),
        time_step=float(doc["time_step"]),
        value_dist=_parse_dist(doc["value_dist"], "value_dist"),
        volume_dist=_parse_dist(doc["volume_dist"], "volume_dist"),
        target_corr_cu=float(doc.get("target_corr_cu", 0.0)),
        seed=seed,
    )
