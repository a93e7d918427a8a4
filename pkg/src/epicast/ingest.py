"""CSV ingestion: wide cumulative case files, weather files, and joins.

The wide layout is `Province/State,Country/Region,Lat,Long,<M/D/YY>...`
with one row per location and one column per day.  Everything is
normalized into tidy per-region daily series with ISO dates.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date, timedelta

from .errors import ContractError, FormatError, RegionLookupError

MEASURES = ("confirmed", "deaths", "recovered")

_WIDE_HEADER = ("Province/State", "Country/Region", "Lat", "Long")


def _norm_text(s):
    return (s or "").strip().lower()


@dataclass(frozen=True, eq=False)
class RegionKey:
    """Identifies one location row.  Text equality is case-insensitive."""

    country: str
    province: str | None = None
    latitude: float | None = None
    longitude: float | None = None

    def __post_init__(self):
        if self.latitude is not None and not -90.0 <= self.latitude <= 90.0:
            object.__setattr__(self, "latitude", None)
        if self.longitude is not None and not -180.0 <= self.longitude <= 180.0:
            object.__setattr__(self, "longitude", None)

    def _ident(self):
        return (_norm_text(self.province), _norm_text(self.country))

    def __eq__(self, other):
        if not isinstance(other, RegionKey):
            return NotImplemented
        return self._ident() == other._ident()

    def __hash__(self):
        return hash(self._ident())

    @property
    def label(self) -> str:
        if self.province:
            return f"{self.province}, {self.country}"
        return self.country


@dataclass(frozen=True)
class RegionSeries:
    """One region's evenly spaced daily observation sequence."""

    key: RegionKey
    measure: str
    start_date: date
    values: tuple
    kind: str = "cumulative"  # or "daily"

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ContractError(f"unknown measure {self.measure!r}")
        if self.kind not in ("cumulative", "daily"):
            raise ContractError(f"unknown series kind {self.kind!r}")
        if len(self.values) < 1:
            raise ContractError("series needs at least one value")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __len__(self):
        return len(self.values)

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=len(self.values) - 1)

    def dates(self) -> list[date]:
        return [self.start_date + timedelta(days=i) for i in range(len(self.values))]


@dataclass(frozen=True)
class WeatherRecord:
    region_name: str
    date: date
    temp_avg: float

    def __post_init__(self):
        if not -90.0 <= self.temp_avg <= 60.0:
            raise ContractError(
                f"temperature {self.temp_avg} degC outside physical bounds for "
                f"{self.region_name} on {self.date}"
            )


@dataclass(frozen=True)
class JoinedRow:
    """One case/weather joined observation used for classification."""

    date: date
    day_index: int
    temperature: float
    latitude: float
    new_cases: float


def _parse_mdy(token: str, column_index: int) -> date:
    parts = token.strip().split("/")
    if len(parts) != 3:
        raise FormatError(f"date column {column_index} ({token!r}) is not M/D/YY")
    try:
        m, d, y = (int(p) for p in parts)
    except ValueError:
        raise FormatError(f"date column {column_index} ({token!r}) is not numeric M/D/YY")
    if y < 100:
        y += 2000
    try:
        return date(y, m, d)
    except ValueError as exc:
        raise FormatError(f"date column {column_index} ({token!r}): {exc}")


def _parse_float_or_none(token):
    token = (token or "").strip()
    if not token:
        return None
    try:
        v = float(token)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def parse_wide_csv(data, measure: str, lenient: bool = False):
    """Parse a wide cumulative CSV into one RegionSeries per row.

    `data` may be bytes or text.  Raises FormatError on a malformed
    header; a non-numeric count cell aborts with row/column coordinates
    unless `lenient` is set, in which case the row is skipped.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty file: no header row")
    if len(header) < 5:
        raise FormatError("header has no date columns after the 4 location columns")
    for i, expect in enumerate(_WIDE_HEADER):
        got = (header[i] or "").strip()
        if _norm_text(got) != _norm_text(expect):
            raise FormatError(f"header column {i + 1} is {got!r}, expected {expect!r}")
    dates = [_parse_mdy(tok, i) for i, tok in enumerate(header[4:], start=5)]
    for prev, cur in zip(dates, dates[1:]):
        if (cur - prev).days != 1:
            raise FormatError(f"date columns are not consecutive days near {cur.isoformat()}")

    out = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            if lenient:
                continue
            raise FormatError(f"row {row_no} has {len(row)} cells, expected {len(header)}")
        key = RegionKey(
            country=row[1].strip(),
            province=row[0].strip() or None,
            latitude=_parse_float_or_none(row[2]),
            longitude=_parse_float_or_none(row[3]),
        )
        values = []
        bad = None
        for col_no, cell in enumerate(row[4:], start=5):
            try:
                values.append(float(cell))
            except ValueError:
                bad = (row_no, col_no, cell)
                break
        if bad is not None:
            if lenient:
                continue
            raise FormatError(
                f"row {bad[0]}, column {bad[1]}: non-numeric cell {bad[2]!r}"
            )
        out.append(RegionSeries(key, measure, dates[0], tuple(values), "cumulative"))
    return out


def serialize_wide_csv(series_list) -> str:
    """Inverse of parse_wide_csv for a list of aligned cumulative series."""
    if not series_list:
        raise ContractError("nothing to serialize")
    start = series_list[0].start_date
    n = len(series_list[0].values)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(_WIDE_HEADER) + [
        f"{d.month}/{d.day}/{d.year % 100}" for d in series_list[0].dates()
    ]
    writer.writerow(header)
    for s in series_list:
        if s.start_date != start or len(s.values) != n:
            raise ContractError("all series must share the same date range")
        writer.writerow(
            [
                s.key.province or "",
                s.key.country,
                "" if s.key.latitude is None else repr(s.key.latitude),
                "" if s.key.longitude is None else repr(s.key.longitude),
            ]
            + [("%d" % v) if float(v).is_integer() else repr(v) for v in s.values]
        )
    return buf.getvalue()


def repair_cumulative(series: RegionSeries):
    """Force monotonicity via running max; returns (series, repair_count)."""
    if series.kind != "cumulative":
        raise ContractError("repair_cumulative expects a cumulative series")
    repaired = []
    repairs = 0
    high = -math.inf
    for v in series.values:
        if v < high:
            repairs += 1
            v = high
        else:
            high = v
        repaired.append(v)
    if repairs == 0:
        return series, 0
    return (
        RegionSeries(series.key, series.measure, series.start_date, tuple(repaired), "cumulative"),
        repairs,
    )


def to_daily(series: RegionSeries) -> RegionSeries:
    """Successive differences, negative increments clamped to 0."""
    if series.kind != "cumulative":
        raise ContractError("to_daily expects a cumulative series")
    vals = series.values
    daily = [vals[0]] + [max(0.0, b - a) for a, b in zip(vals, vals[1:])]
    return RegionSeries(series.key, series.measure, series.start_date, tuple(daily), "daily")


def split_train_test(series: RegionSeries, holdout_days: int):
    """Split off the last `holdout_days` points; test may be None when 0."""
    if holdout_days < 0:
        raise ContractError("holdout_days must be >= 0")
    n = len(series.values)
    if holdout_days >= n:
        raise ContractError(f"holdout {holdout_days} >= series length {n}")
    if holdout_days == 0:
        return series, None
    cut = n - holdout_days
    train = RegionSeries(series.key, series.measure, series.start_date,
                         series.values[:cut], series.kind)
    test = RegionSeries(series.key, series.measure,
                        series.start_date + timedelta(days=cut),
                        series.values[cut:], series.kind)
    return train, test


def parse_weather_csv(data) -> list[WeatherRecord]:
    """Parse `region,date,temp_avg_c` rows with ISO dates."""
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(data))
    try:
        header = [_norm_text(c) for c in next(reader)]
    except StopIteration:
        raise FormatError("empty weather file")
    if header[:3] != ["region", "date", "temp_avg_c"]:
        raise FormatError("weather header must be `region,date,temp_avg_c`")
    seen = set()
    out = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            d = date.fromisoformat(row[1].strip())
            t = float(row[2])
        except (ValueError, IndexError) as exc:
            raise FormatError(f"weather row {row_no}: {exc}")
        dup_key = (_norm_text(row[0]), d)
        if dup_key in seen:
            raise FormatError(f"weather row {row_no}: duplicate (region, date) {dup_key}")
        seen.add(dup_key)
        out.append(WeatherRecord(row[0].strip(), d, t))
    return out


def parse_name_map(data) -> dict:
    """Parse the `case_region,weather_region` mapping file."""
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(data))
    try:
        header = [_norm_text(c) for c in next(reader)]
    except StopIteration:
        raise FormatError("empty name-map file")
    if header[:2] != ["case_region", "weather_region"]:
        raise FormatError("name-map header must be `case_region,weather_region`")
    out = {}
    for row in reader:
        if len(row) >= 2 and row[0].strip():
            out[_norm_text(row[0])] = row[1].strip()
    return out


def join_weather(case: RegionSeries, weather, name_map):
    """Inner-join daily case counts with weather by date.

    Returns (rows sorted by date, dropped_count).  The case region is
    resolved through the explicit name map; no fuzzy matching.
    """
    if case.kind != "daily":
        raise ContractError("join_weather expects a daily series")
    weather_name = name_map.get(_norm_text(case.key.label))
    if weather_name is None:
        weather_name = name_map.get(_norm_text(case.key.country))
    if weather_name is None:
        raise RegionLookupError(case.key.label, name_map.keys())
    temp_by_date = {
        w.date: w.temp_avg for w in weather if _norm_text(w.region_name) == _norm_text(weather_name)
    }
    if case.key.latitude is None:
        raise ContractError(f"region {case.key.label!r} has no latitude; cannot build features")
    rows = []
    dropped = 0
    for i, d in enumerate(case.dates()):
        temp = temp_by_date.get(d)
        if temp is None:
            dropped += 1
            continue
        rows.append(JoinedRow(d, i, temp, case.key.latitude, case.values[i]))
    return rows, dropped
