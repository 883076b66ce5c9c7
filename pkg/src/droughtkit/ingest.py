"""CSV ingestion: daily weather rows -> weekly per-county records.

The input schema is the county-level daily weather table: one row per
(fips, date) with 18 weather variables and a drought score that is
present only on the weekly release days. Weekly records average the 7
daily values ending on each release day.
"""

import csv
import datetime as dt
import importlib.resources
from dataclasses import dataclass, replace

from .errors import (
    AllMissingVariable,
    EmptyFile,
    MalformedRow,
    MissingColumn,
    NoScoreDays,
    UnknownFips,
)

# column order of the input CSV; also the feature order everywhere downstream
WEATHER_VARS = (
    "PRECTOT", "PS", "QV2M", "T2M", "T2MDEW", "T2MWET", "T2M_MAX",
    "T2M_MIN", "T2M_RANGE", "TS", "WS10M", "WS10M_MAX", "WS10M_MIN",
    "WS10M_RANGE", "WS50M", "WS50M_MAX", "WS50M_MIN", "WS50M_RANGE",
)

CSV_COLUMNS = ("fips", "date", "score") + WEATHER_VARS

# long names used in feature-importance reports
VARIABLE_LABELS = {
    "PRECTOT": "Precipitation (mm day-1)",
    "PS": "Surface Pressure (kPa)",
    "QV2M": "Specific Humidity at 2 Meters (g/kg)",
    "T2M": "Temperature at 2 Meters (C)",
    "T2MDEW": "Dew/Frost Point at 2 Meters (C)",
    "T2MWET": "Wet Bulb Temperature at 2 Meters (C)",
    "T2M_MAX": "Maximum Temperature at 2 Meters (C)",
    "T2M_MIN": "Minimum Temperature at 2 Meters (C)",
    "T2M_RANGE": "Temperature Range at 2 Meters (C)",
    "TS": "Earth Skin Temperature (C)",
    "WS10M": "Wind Speed at 10 Meters (m/s)",
    "WS10M_MAX": "Maximum Wind Speed at 10 Meters (m/s)",
    "WS10M_MIN": "Minimum Wind Speed at 10 Meters (m/s)",
    "WS10M_RANGE": "Wind Speed Range at 10 Meters (m/s)",
    "WS50M": "Wind Speed at 50 Meters (m/s)",
    "WS50M_MAX": "Maximum Wind Speed at 50 Meters (m/s)",
    "WS50M_MIN": "Minimum Wind Speed at 50 Meters (m/s)",
    "WS50M_RANGE": "Wind Speed Range at 50 Meters (m/s)",
}


@dataclass(frozen=True)
class DailyWeatherRecord:
    fips: int
    date: dt.date
    weather: dict  # variable -> float or None (missing)
    score: float | None = None


@dataclass(frozen=True)
class CountyMeta:
    fips: int
    name: str
    latitude: float
    longitude: float


@dataclass(frozen=True)
class WeeklyRecord:
    fips: int
    week_index: int
    week_end: dt.date
    weather: dict  # variable -> float, mean over the week
    score: float
    month: int = 0
    latitude: float = 0.0
    longitude: float = 0.0
    # set by normalization so labels keep 0-5 units after score is z-scored
    raw_score: float | None = None


@dataclass
class IngestStats:
    """Bookkeeping from aggregation, reported but not part of the data."""
    dropped_partial_weeks: int = 0
    missing_daily_values: int = 0
    counties: int = 0
    weekly_records: int = 0


def _parse_cell(text):
    text = text.strip()
    if not text:
        return None
    return float(text)


def parse_daily_csv(path):
    """Read a daily weather CSV into DailyWeatherRecord objects.

    Unparseable numeric cells become missing values (None); missing
    required columns or malformed fips/date rows are hard errors.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyFile(f"{path} has no header row")
        have = set(reader.fieldnames)
        for col in CSV_COLUMNS:
            if col not in have:
                raise MissingColumn(col)

        records = []
        for i, row in enumerate(reader, start=2):
            try:
                fips = int(row["fips"])
            except (TypeError, ValueError):
                raise MalformedRow(i, f"bad fips {row.get('fips')!r}")
            try:
                date = dt.date.fromisoformat(row["date"].strip())
            except (TypeError, ValueError):
                raise MalformedRow(i, f"bad date {row.get('date')!r}")

            weather = {}
            for var in WEATHER_VARS:
                try:
                    weather[var] = _parse_cell(row[var])
                except ValueError:
                    weather[var] = None
            try:
                score = _parse_cell(row["score"])
            except ValueError:
                score = None
            if score is not None and not 0.0 <= score <= 5.0:
                raise MalformedRow(i, f"score {score} outside [0, 5]")
            records.append(DailyWeatherRecord(fips, date, weather, score))

    if not records:
        raise EmptyFile(f"{path} has a header but no data rows")
    return records


def filter_california(records):
    """Keep only California counties (FIPS 6000-6999), order preserved."""
    return [r for r in records if 6000 <= r.fips <= 6999]


def aggregate_weekly(records, stats=None):
    """Average dailies into one WeeklyRecord per score release day.

    Each weekly value is the mean of the (up to 7) observed daily values
    in the 7-day window ending on the release day. Release days closer
    than 7 days to the county's first daily are dropped as partial
    weeks. Returns {fips: [WeeklyRecord sorted by week_index]}.
    """
    if stats is None:
        stats = IngestStats()
    by_fips = {}
    for r in records:
        by_fips.setdefault(r.fips, []).append(r)

    out = {}
    for fips in sorted(by_fips):
        dailies = sorted(by_fips[fips], key=lambda r: r.date)
        by_date = {r.date: r for r in dailies}
        first = dailies[0].date
        release_days = [r.date for r in dailies if r.score is not None]
        if not release_days:
            raise NoScoreDays(fips)

        weekly = []
        idx = 0
        for day in release_days:
            if (day - first).days < 6:
                stats.dropped_partial_weeks += 1
                continue
            window = [by_date.get(day - dt.timedelta(days=k)) for k in range(7)]
            means = {}
            for var in WEATHER_VARS:
                vals = [d.weather[var] for d in window
                        if d is not None and d.weather[var] is not None]
                if not vals:
                    raise AllMissingVariable(var, day)
                stats.missing_daily_values += 7 - len(vals)
                means[var] = sum(vals) / len(vals)
            weekly.append(WeeklyRecord(
                fips=fips,
                week_index=idx,
                week_end=day,
                weather=means,
                score=by_date[day].score,
            ))
            idx += 1
        out[fips] = weekly

    stats.counties = len(out)
    stats.weekly_records = sum(len(v) for v in out.values())
    return out


def load_county_meta(path=None):
    """Load county metadata; defaults to the bundled CA table."""
    if path is None:
        source = importlib.resources.files("droughtkit.data") / "ca_counties.csv"
        text = source.read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    meta = {}
    for row in csv.DictReader(text.splitlines()):
        fips = int(row["fips"])
        meta[fips] = CountyMeta(
            fips=fips,
            name=row["name"],
            latitude=float(row["latitude"]),
            longitude=float(row["longitude"]),
        )
    return meta


def attach_static_features(weekly, meta):
    """Fill in latitude/longitude from meta and month from week_end."""
    out = {}
    for fips, recs in weekly.items():
        if fips not in meta:
            raise UnknownFips(fips)
        m = meta[fips]
        out[fips] = [
            replace(r, latitude=m.latitude, longitude=m.longitude,
                    month=r.week_end.month)
            for r in recs
        ]
    return out


def ingest_csv(path, meta=None, california_only=True, stats=None):
    """Full ingestion pipeline: parse -> filter -> aggregate -> enrich."""
    if meta is None:
        meta = load_county_meta()
    records = parse_daily_csv(path)
    if california_only:
        records = filter_california(records)
    weekly = aggregate_weekly(records, stats=stats)
    return attach_static_features(weekly, meta)
