"""HURDAT2 best-track ingestion: parse, validate, and re-serialize.

The HURDAT2 format is comma-delimited text.  A header line

    AL092011,              IRENE,     39,

declares basin, cyclone number, year, name, and the number of data rows
that follow.  Each data row carries a 6-hourly fix:

    20110821, 0000,  , TS, 15.0N,  59.0W,  45, 1006, ... 12 wind radii ...

Sentinel values (-999 for pressure/radii, -99 for wind) denote missing
data and are mapped to None on parse; they never escape as numbers.
Parsing is a pure function of the input text and may run concurrently on
independent files.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Optional

__all__ = [
    "TrackPoint",
    "Storm",
    "ParseError",
    "MalformedHeader",
    "MalformedDataRow",
    "RowCountMismatch",
    "BadCoordinate",
    "NonMonotoneTime",
    "parse_hurdat2",
    "serialize_hurdat2",
    "count_by_year",
]

_DATA_FIELDS_FULL = 20  # date, time, id, status, lat, lon, wind, pressure, 12 radii
_DATA_FIELDS_BARE = 8   # same without the radii block


class ParseError(ValueError):
    """Base class for HURDAT2 parse failures; carries a 1-based line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class MalformedHeader(ParseError):
    pass


class MalformedDataRow(ParseError):
    pass


class RowCountMismatch(ParseError):
    pass


class BadCoordinate(ParseError):
    pass


class NonMonotoneTime(ParseError):
    pass


@dataclass(frozen=True)
class TrackPoint:
    """One best-track fix.

    latitude is in [-90, 90] and longitude in (-180, 180], both in degrees
    with south/west negative.  Missing wind, pressure, or radii are None.
    wind_radii is None when the row had no radii block at all, otherwise a
    12-tuple (34/50/64 kt extents in NE, SE, SW, NW quadrants, nm).
    """

    timestamp: datetime
    record_id: Optional[str]
    status: str
    latitude: float
    longitude: float
    max_wind: Optional[int] = None
    min_pressure: Optional[int] = None
    wind_radii: Optional[tuple] = None


@dataclass(frozen=True)
class Storm:
    """A parsed HURDAT2 cyclone: header metadata plus its track."""

    basin: str
    cyclone_number: int
    year: int
    name: str
    points: tuple

    @property
    def storm_id(self) -> str:
        return f"{self.basin}{self.cyclone_number:02d}{self.year:04d}"


def _parse_coordinate(raw: str, is_lat: bool, line_no: int) -> float:
    raw = raw.strip()
    if len(raw) < 2 or raw[-1] not in "NSEW":
        raise BadCoordinate(line_no, f"unparsable coordinate {raw!r}")
    hemi = raw[-1]
    try:
        value = float(raw[:-1])
    except ValueError:
        raise BadCoordinate(line_no, f"unparsable coordinate {raw!r}") from None
    if hemi in "SW":
        value = -value
    if is_lat:
        if hemi not in "NS" or not -90.0 <= value <= 90.0:
            raise BadCoordinate(line_no, f"latitude out of range: {raw!r}")
    else:
        if hemi not in "EW" or not -180.0 < value <= 180.0:
            raise BadCoordinate(line_no, f"longitude out of range: {raw!r}")
    return value


def _parse_missing_int(raw: str, sentinels: tuple, line_no: int) -> Optional[int]:
    try:
        value = int(raw)
    except ValueError:
        raise MalformedDataRow(line_no, f"non-numeric field {raw!r}") from None
    return None if value in sentinels else value


def _split(line: str) -> list:
    # A trailing comma yields one empty trailing field; drop it.
    parts = [p.strip() for p in line.split(",")]
    if parts and parts[-1] == "":
        parts.pop()
    return parts


def _parse_data_row(line: str, line_no: int) -> TrackPoint:
    parts = _split(line)
    if len(parts) not in (_DATA_FIELDS_BARE, _DATA_FIELDS_FULL):
        raise MalformedDataRow(
            line_no, f"expected {_DATA_FIELDS_BARE} or {_DATA_FIELDS_FULL} fields, got {len(parts)}"
        )
    try:
        timestamp = datetime.strptime(parts[0] + parts[1].zfill(4), "%Y%m%d%H%M")
    except ValueError:
        raise MalformedDataRow(line_no, f"bad date/time {parts[0]!r} {parts[1]!r}") from None
    record_id = parts[2] or None
    status = parts[3]
    latitude = _parse_coordinate(parts[4], True, line_no)
    longitude = _parse_coordinate(parts[5], False, line_no)
    max_wind = _parse_missing_int(parts[6], (-99, -999), line_no)
    min_pressure = _parse_missing_int(parts[7], (-999,), line_no)
    wind_radii = None
    if len(parts) == _DATA_FIELDS_FULL:
        wind_radii = tuple(
            _parse_missing_int(p, (-999,), line_no) for p in parts[8:20]
        )
    return TrackPoint(
        timestamp=timestamp,
        record_id=record_id,
        status=status,
        latitude=latitude,
        longitude=longitude,
        max_wind=max_wind,
        min_pressure=min_pressure,
        wind_radii=wind_radii,
    )


def parse_hurdat2(text: str) -> list:
    """Parse HURDAT2 text into a list of Storm records, in file order.

    Accepts LF or CRLF line endings and tolerant field padding.  Blank
    lines are ignored.  Raises MalformedHeader, RowCountMismatch,
    BadCoordinate, MalformedDataRow, or NonMonotoneTime with the offending
    1-based line number.
    """
    storms = []
    lines = text.splitlines()
    # (line_no, line) pairs with blanks removed
    numbered = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    pos = 0
    last_header_no = None
    while pos < len(numbered):
        line_no, line = numbered[pos]
        parts = _split(line)
        if len(parts) != 3:
            if last_header_no is not None and len(parts) in (_DATA_FIELDS_BARE, _DATA_FIELDS_FULL):
                raise RowCountMismatch(
                    last_header_no, f"more data rows than declared (extra row at line {line_no})"
                )
            raise MalformedHeader(line_no, f"expected 3 header fields, got {len(parts)}")
        last_header_no = line_no
        ident, name, count_raw = parts
        if len(ident) != 8:
            raise MalformedHeader(line_no, f"cyclone id {ident!r} is not 8 characters")
        basin = ident[:2]
        try:
            number = int(ident[2:4])
            year = int(ident[4:8])
        except ValueError:
            raise MalformedHeader(line_no, f"non-numeric cyclone id {ident!r}") from None
        try:
            declared = int(count_raw)
        except ValueError:
            raise MalformedHeader(line_no, f"non-numeric row count {count_raw!r}") from None
        if declared < 1:
            raise MalformedHeader(line_no, f"row count must be >= 1, got {declared}")
        pos += 1

        points = []
        for _ in range(declared):
            if pos >= len(numbered):
                raise RowCountMismatch(
                    line_no, f"header declares {declared} rows but file ends after {len(points)}"
                )
            row_no, row = numbered[pos]
            if len(_split(row)) == 3:
                raise RowCountMismatch(
                    line_no,
                    f"header declares {declared} rows but a new header starts after {len(points)}",
                )
            points.append(_parse_data_row(row, row_no))
            pos += 1

        for earlier, later in zip(points, points[1:]):
            if later.timestamp <= earlier.timestamp:
                raise NonMonotoneTime(
                    line_no,
                    f"timestamps not strictly increasing in {ident}: "
                    f"{earlier.timestamp} -> {later.timestamp}",
                )
        storms.append(
            Storm(basin=basin, cyclone_number=number, year=year, name=name, points=tuple(points))
        )
    return storms


def _format_coordinate(value: float, is_lat: bool) -> str:
    if is_lat:
        hemi = "N" if value >= 0 else "S"
    else:
        hemi = "E" if value >= 0 else "W"
    return f"{abs(value):.1f}{hemi}"


def _format_missing(value: Optional[int], sentinel: int, width: int) -> str:
    return f"{sentinel if value is None else value:>{width}}"


def serialize_hurdat2(storms) -> str:
    """Render storms back to canonical HURDAT2 text (LF line endings).

    Canonical column widths follow the official file, so parse followed by
    serialize reproduces a canonical input byte for byte.
    """
    out = []
    for storm in storms:
        ident = storm.storm_id
        out.append(f"{ident},{storm.name:>19},{len(storm.points):>7},")
        for p in storm.points:
            fields = [
                p.timestamp.strftime("%Y%m%d"),
                p.timestamp.strftime("%H%M"),
                f"{p.record_id or '':>1}",
                f"{p.status:>2}",
                f"{_format_coordinate(p.latitude, True):>5}",
                f"{_format_coordinate(p.longitude, False):>6}",
                _format_missing(p.max_wind, -99, 3),
                _format_missing(p.min_pressure, -999, 4),
            ]
            if p.wind_radii is not None:
                fields.extend(_format_missing(r, -999, 4) for r in p.wind_radii)
            out.append(", ".join(fields))
    return "\n".join(out) + ("\n" if out else "")


def count_by_year(storms, year_range) -> dict:
    """Count storms per year over an inclusive (first, last) year range.

    A storm is attributed to the year of its first fix.  Years with no
    storms appear with count 0.
    """
    first, last = year_range
    counts = {year: 0 for year in range(first, last + 1)}
    for storm in storms:
        year = storm.points[0].timestamp.year
        if first <= year <= last:
            counts[year] += 1
    return counts
