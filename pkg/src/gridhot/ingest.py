"""Parsing and aggregation of gridded telecom activity datasets.

Three inputs are handled: per-cell activity files (SMS / call / internet
quantities), cell-to-cell interaction files (directional strengths), and a
GeoJSON grid file with one polygon per cell.  Activity and interaction
files are delimited text, optionally gzip-compressed (detected by magic
bytes).  Records are filtered to a half-open time window and reduced to
per-cell traffic intensities and directed pairwise interaction strengths.
"""

from __future__ import annotations

import dataclasses
import gzip
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator

from .errors import DomainError, ParseError, UnsupportedGeometryError

MALFORMED_POLICIES = ("abort", "skip")


@dataclass(frozen=True)
class ColumnLayout:
    """Column positions within the delimited input files.

    Defaults match the published layout: activity files carry square id,
    time, country code and the five activity quantities; interaction files
    carry source id, destination id, time and strength.
    """

    delimiter: str = "\t"
    # activity file columns
    square_id: int = 0
    time: int = 1
    country_code: int = 2
    sms_in: int = 3
    sms_out: int = 4
    call_in: int = 5
    call_out: int = 6
    internet: int = 7
    # interaction file columns
    src_id: int = 0
    dst_id: int = 1
    interaction_time: int = 2
    strength: int = 3


DEFAULT_LAYOUT = ColumnLayout()


@dataclass(frozen=True)
class IngestConfig:
    layout: ColumnLayout = DEFAULT_LAYOUT
    on_malformed: str = "abort"


@dataclass(frozen=True)
class TimeWindow:
    """Half-open interval [start, end) in epoch milliseconds (UTC)."""

    start: int
    end: int

    def __post_init__(self):
        if self.start >= self.end:
            raise DomainError(
                f"window start must precede end, got [{self.start}, {self.end})"
            )

    def contains(self, timestamp: int) -> bool:
        return self.start <= timestamp < self.end


@dataclass(frozen=True)
class ActivityRecord:
    """One activity measurement for one cell; absent quantities are 0."""

    cell_id: int
    timestamp: int
    sms_in: float = 0.0
    sms_out: float = 0.0
    call_in: float = 0.0
    call_out: float = 0.0
    internet: float = 0.0
    country_code: int = 0

    def total(self) -> float:
        """Equal-weight sum of the five activity quantities."""
        return self.sms_in + self.sms_out + self.call_in + self.call_out + self.internet


@dataclass(frozen=True)
class InteractionRecord:
    """Directional interaction strength from one cell to another."""

    src_id: int
    dst_id: int
    timestamp: int
    strength: float


@dataclass(frozen=True)
class GridCell:
    """A grid cell with its WGS84 polygon ring (closed, first == last)."""

    cell_id: int
    polygon: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class TrafficAggregate:
    """Per-cell summed communication intensity over one window."""

    window: TimeWindow
    intensities: dict[int, float]


@dataclass(frozen=True)
class InteractionAggregate:
    """Summed directional strength per ordered cell pair over one window."""

    window: TimeWindow
    strengths: dict[tuple[int, int], float]


@dataclass
class ParseStats:
    """Mutable line counters, filled in by the parsers when supplied."""

    lines: int = 0
    parsed: int = 0
    skipped: int = 0


_GZIP_MAGIC = b"\x1f\x8b"


def open_text(path) -> IO[str]:
    """Open a text file, transparently unpacking gzip (sniffed by magic bytes)."""
    with open(path, "rb") as probe:
        magic = probe.read(2)
    if magic == _GZIP_MAGIC:
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def parse_epoch_ms(text: str) -> int:
    """Parse a window bound: epoch milliseconds, or an ISO date/datetime (UTC).

    Accepted forms: ``1383260400000``, ``2013-11-18``, ``2013-11-18T06:30``.
    """
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    for fmt in ("%Y-%m-%d", "%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S"):
        try:
            dt = datetime.strptime(text, fmt).replace(tzinfo=timezone.utc)
            return int(dt.timestamp() * 1000)
        except ValueError:
            continue
    raise DomainError(f"cannot parse time bound {text!r}")


def _check_policy(on_malformed: str) -> None:
    if on_malformed not in MALFORMED_POLICIES:
        raise DomainError(
            f"on_malformed must be one of {MALFORMED_POLICIES}, got {on_malformed!r}"
        )


def _required_field(fields: list[str], index: int, path, line_no: int, name: str) -> str:
    if index >= len(fields) or not fields[index].strip():
        raise ParseError(f"missing {name} column", path, line_no)
    return fields[index].strip()


def _parse_id(raw: str, path, line_no: int, name: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise ParseError(f"malformed {name} {raw!r}", path, line_no) from None
    if value <= 0:
        raise ParseError(f"{name} must be positive, got {value}", path, line_no)
    return value


def _parse_quantity(fields: list[str], index: int, path, line_no: int, name: str) -> float:
    # absent or empty columns read as 0 (the source data omits zero activity)
    if index >= len(fields):
        return 0.0
    raw = fields[index].strip()
    if not raw:
        return 0.0
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"malformed {name} {raw!r}", path, line_no) from None
    if value < 0:
        raise ParseError(f"{name} must be nonnegative, got {value}", path, line_no)
    return value


def _activity_record(line: str, layout: ColumnLayout, path, line_no: int) -> ActivityRecord:
    fields = line.split(layout.delimiter)
    cell_id = _parse_id(
        _required_field(fields, layout.square_id, path, line_no, "cell id"),
        path,
        line_no,
        "cell id",
    )
    raw_time = _required_field(fields, layout.time, path, line_no, "timestamp")
    try:
        timestamp = int(raw_time)
    except ValueError:
        raise ParseError(f"malformed timestamp {raw_time!r}", path, line_no) from None
    country = 0
    if layout.country_code < len(fields) and fields[layout.country_code].strip():
        raw_country = fields[layout.country_code].strip()
        try:
            country = int(raw_country)
        except ValueError:
            raise ParseError(f"malformed country code {raw_country!r}", path, line_no) from None
    return ActivityRecord(
        cell_id=cell_id,
        timestamp=timestamp,
        sms_in=_parse_quantity(fields, layout.sms_in, path, line_no, "sms_in"),
        sms_out=_parse_quantity(fields, layout.sms_out, path, line_no, "sms_out"),
        call_in=_parse_quantity(fields, layout.call_in, path, line_no, "call_in"),
        call_out=_parse_quantity(fields, layout.call_out, path, line_no, "call_out"),
        internet=_parse_quantity(fields, layout.internet, path, line_no, "internet"),
        country_code=country,
    )


def _interaction_record(line: str, layout: ColumnLayout, path, line_no: int) -> InteractionRecord:
    fields = line.split(layout.delimiter)
    src = _parse_id(
        _required_field(fields, layout.src_id, path, line_no, "source id"),
        path,
        line_no,
        "source id",
    )
    dst = _parse_id(
        _required_field(fields, layout.dst_id, path, line_no, "destination id"),
        path,
        line_no,
        "destination id",
    )
    raw_time = _required_field(fields, layout.interaction_time, path, line_no, "timestamp")
    try:
        timestamp = int(raw_time)
    except ValueError:
        raise ParseError(f"malformed timestamp {raw_time!r}", path, line_no) from None
    strength = _parse_quantity(fields, layout.strength, path, line_no, "strength")
    return InteractionRecord(src_id=src, dst_id=dst, timestamp=timestamp, strength=strength)


def parse_activity(
    path,
    layout: ColumnLayout = DEFAULT_LAYOUT,
    on_malformed: str = "abort",
    stats: ParseStats | None = None,
) -> Iterator[ActivityRecord]:
    """Yield one :class:`ActivityRecord` per line of an activity file.

    Args:
        path: delimited text file, optionally gzip-compressed.
        layout: column positions and delimiter.
        on_malformed: ``"abort"`` raises :class:`ParseError` on the first bad
            line; ``"skip"`` drops bad lines and counts them in ``stats``.
        stats: optional :class:`ParseStats` to fill with line counters.
    """
    _check_policy(on_malformed)
    with open_text(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            if stats is not None:
                stats.lines += 1
            try:
                record = _activity_record(line.rstrip("\r\n"), layout, path, line_no)
            except ParseError:
                if on_malformed == "abort":
                    raise
                if stats is not None:
                    stats.skipped += 1
                continue
            if stats is not None:
                stats.parsed += 1
            yield record


def parse_interactions(
    path,
    layout: ColumnLayout = DEFAULT_LAYOUT,
    on_malformed: str = "abort",
    stats: ParseStats | None = None,
) -> Iterator[InteractionRecord]:
    """Yield one :class:`InteractionRecord` per line of an interaction file.

    Same arguments and malformed-line policy as :func:`parse_activity`.
    """
    _check_policy(on_malformed)
    with open_text(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            if stats is not None:
                stats.lines += 1
            try:
                record = _interaction_record(line.rstrip("\r\n"), layout, path, line_no)
            except ParseError:
                if on_malformed == "abort":
                    raise
                if stats is not None:
                    stats.skipped += 1
                continue
            if stats is not None:
                stats.parsed += 1
            yield record


def _fmt(value: float) -> str:
    # repr round-trips exactly through float(), keeping re-parsed records identical
    return repr(float(value))


def format_activity_line(record: ActivityRecord, layout: ColumnLayout = DEFAULT_LAYOUT) -> str:
    """Render a record as one input line (inverse of :func:`parse_activity`)."""
    width = 1 + max(
        layout.square_id,
        layout.time,
        layout.country_code,
        layout.sms_in,
        layout.sms_out,
        layout.call_in,
        layout.call_out,
        layout.internet,
    )
    fields = [""] * width
    fields[layout.square_id] = str(record.cell_id)
    fields[layout.time] = str(record.timestamp)
    fields[layout.country_code] = str(record.country_code)
    fields[layout.sms_in] = _fmt(record.sms_in)
    fields[layout.sms_out] = _fmt(record.sms_out)
    fields[layout.call_in] = _fmt(record.call_in)
    fields[layout.call_out] = _fmt(record.call_out)
    fields[layout.internet] = _fmt(record.internet)
    return layout.delimiter.join(fields)


def format_interaction_line(record: InteractionRecord, layout: ColumnLayout = DEFAULT_LAYOUT) -> str:
    """Render a record as one input line (inverse of :func:`parse_interactions`)."""
    width = 1 + max(layout.src_id, layout.dst_id, layout.interaction_time, layout.strength)
    fields = [""] * width
    fields[layout.src_id] = str(record.src_id)
    fields[layout.dst_id] = str(record.dst_id)
    fields[layout.interaction_time] = str(record.timestamp)
    fields[layout.strength] = _fmt(record.strength)
    return layout.delimiter.join(fields)


_CELL_ID_KEYS = ("cell_id", "cellId", "id")


def _feature_cell_id(feature: dict, index: int, path) -> int:
    properties = feature.get("properties") or {}
    raw = None
    for key in _CELL_ID_KEYS:
        if key in properties:
            raw = properties[key]
            break
    else:
        if "id" in feature:
            raw = feature["id"]
    if raw is None:
        raise ParseError(f"feature {index} has no cell id property", path)
    try:
        cell_id = int(raw)
    except (TypeError, ValueError):
        raise ParseError(f"feature {index} has malformed cell id {raw!r}", path) from None
    if cell_id <= 0:
        raise ParseError(f"feature {index} cell id must be positive, got {cell_id}", path)
    return cell_id


def parse_grid(path) -> list[GridCell]:
    """Read a GeoJSON FeatureCollection of cell polygons.

    Each feature must carry a Polygon geometry and a cell id under one of
    the property keys ``cell_id`` / ``cellId`` / ``id`` (or a feature-level
    ``id``).  Duplicate ids, open rings and non-polygon geometries are
    rejected.
    """
    with open_text(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid GeoJSON: {exc}", path) from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError("expected a GeoJSON FeatureCollection", path)
    cells: list[GridCell] = []
    seen: set[int] = set()
    for index, feature in enumerate(doc.get("features", [])):
        geometry = feature.get("geometry") or {}
        gtype = geometry.get("type")
        if gtype != "Polygon":
            raise UnsupportedGeometryError(
                f"unsupported geometry type {gtype!r} in feature {index}", path
            )
        rings = geometry.get("coordinates") or []
        if not rings:
            raise ParseError(f"feature {index} polygon has no rings", path)
        try:
            ring = tuple((float(lon), float(lat)) for lon, lat in rings[0])
        except (TypeError, ValueError):
            raise ParseError(f"feature {index} has malformed coordinates", path) from None
        if len(ring) < 4 or ring[0] != ring[-1]:
            raise ParseError(
                f"feature {index} ring must be closed with at least 4 points", path
            )
        cell_id = _feature_cell_id(feature, index, path)
        if cell_id in seen:
            raise ParseError(f"duplicate cell id {cell_id}", path)
        seen.add(cell_id)
        cells.append(GridCell(cell_id=cell_id, polygon=ring))
    return cells


def aggregate_traffic(records: Iterable[ActivityRecord], window: TimeWindow) -> TrafficAggregate:
    """Sum per-cell activity over in-window records.

    The per-cell intensity is the equal-weight sum of all five activity
    quantities.  Summation uses ``math.fsum`` so the result is identical
    under any permutation of the input stream.  Cells with no in-window
    records are absent from the map.
    """
    parts: dict[int, list[float]] = {}
    for record in records:
        if window.contains(record.timestamp):
            parts.setdefault(record.cell_id, []).append(record.total())
    intensities = {cell: math.fsum(values) for cell, values in sorted(parts.items())}
    return TrafficAggregate(window=window, intensities=intensities)


def aggregate_interactions(
    records: Iterable[InteractionRecord], window: TimeWindow
) -> InteractionAggregate:
    """Sum directional strength per ordered (src, dst) pair over in-window records.

    Pairs whose strengths sum to zero are omitted.  Order-independent for
    the same reason as :func:`aggregate_traffic`.
    """
    parts: dict[tuple[int, int], list[float]] = {}
    for record in records:
        if window.contains(record.timestamp):
            parts.setdefault((record.src_id, record.dst_id), []).append(record.strength)
    strengths = {}
    for pair, values in sorted(parts.items()):
        total = math.fsum(values)
        if total > 0.0:
            strengths[pair] = total
    return InteractionAggregate(window=window, strengths=strengths)


_DELIMITER_NAMES = {"tab": "\t", "comma": ",", "semicolon": ";", "space": " "}

_LAYOUT_KEYS = {f.name for f in dataclasses.fields(ColumnLayout)} - {"delimiter"}


def load_ingest_config(path) -> IngestConfig:
    """Read a plain ``key = value`` ingest configuration file.

    Recognized keys: ``delimiter`` (``tab``/``comma``/``semicolon``/``space``
    or a literal character), ``on_malformed`` (``abort``/``skip``) and any
    column name of :class:`ColumnLayout` with an integer index.  ``#``
    starts a comment.
    """
    overrides: dict[str, object] = {}
    on_malformed = "abort"
    with open_text(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ParseError("expected `key = value`", path, line_no)
            key, _, value = text.partition("=")
            key = key.strip()
            value = value.strip()
            if key == "delimiter":
                overrides["delimiter"] = _DELIMITER_NAMES.get(value, value)
                if len(overrides["delimiter"]) != 1:
                    raise ParseError(f"delimiter must be a single character, got {value!r}", path, line_no)
            elif key == "on_malformed":
                if value not in MALFORMED_POLICIES:
                    raise ParseError(
                        f"on_malformed must be one of {MALFORMED_POLICIES}, got {value!r}",
                        path,
                        line_no,
                    )
                on_malformed = value
            elif key in _LAYOUT_KEYS:
                try:
                    index = int(value)
                except ValueError:
                    raise ParseError(f"column index for {key} must be an integer", path, line_no) from None
                if index < 0:
                    raise ParseError(f"column index for {key} must be nonnegative", path, line_no)
                overrides[key] = index
            else:
                raise ParseError(f"unknown config key {key!r}", path, line_no)
    return IngestConfig(layout=dataclasses.replace(DEFAULT_LAYOUT, **overrides), on_malformed=on_malformed)
