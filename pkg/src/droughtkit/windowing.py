"""Temporal splitting, normalization, and sliding-window sampling.

Feature order per week (F = 22): the 18 weather variables in CSV
column order, then score, latitude, longitude, month. Labels are
always raw drought scores in [0, 5]; only inputs get z-scored.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateSplit, EmptySplit, RaggedCounties
from .ingest import WEATHER_VARS

FEATURE_NAMES = tuple(WEATHER_VARS) + ("score", "latitude", "longitude", "month")
N_FEATURES = len(FEATURE_NAMES)  # 22
SCORE_FEATURE = len(WEATHER_VARS)  # index of score within a feature row


@dataclass(frozen=True)
class WindowSpec:
    m: int  # window size in weeks
    n: int  # forecast horizon in weeks

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"window and horizon must be >= 1, got {self}")


@dataclass(frozen=True)
class SplitDataset:
    train: dict  # fips -> [WeeklyRecord]
    validation: dict
    test: dict

    def splits(self):
        return (("train", self.train), ("validation", self.validation),
                ("test", self.test))


@dataclass(frozen=True)
class NormalizationStats:
    mean: np.ndarray  # (F,)
    std: np.ndarray   # (F,)


@dataclass(frozen=True)
class WindowSample:
    fips: int
    anchor: int            # week_index of the last input week
    features: np.ndarray   # (m, F), possibly normalized
    labels: np.ndarray     # (n,) raw scores
    window_scores: np.ndarray | None = None  # (m,) raw scores of the input weeks


def feature_row(record):
    """Raw 22-entry feature vector for one weekly record."""
    row = np.empty(N_FEATURES)
    for j, var in enumerate(WEATHER_VARS):
        row[j] = record.weather[var]
    row[SCORE_FEATURE] = record.score
    row[SCORE_FEATURE + 1] = record.latitude
    row[SCORE_FEATURE + 2] = record.longitude
    row[SCORE_FEATURE + 3] = record.month
    return row


def _label_score(record):
    raw = getattr(record, "raw_score", None)
    return record.score if raw is None else raw


def temporal_split(weekly, ratios=(0.70, 0.10, 0.20), year_boundaries=None):
    """Split each county's series into train/validation/test by time.

    Default: boundaries at floor(r1*T) and floor((r1+r2)*T) weeks,
    identical for every county. With year_boundaries=(y1, y2), train
    runs through year y1 and validation through year y2 instead.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios {ratios} do not sum to 1")
    if not weekly:
        raise DegenerateSplit("no counties")

    ranges = {(recs[0].week_index, recs[-1].week_index)
              for recs in weekly.values() if recs}
    if len(ranges) != 1 or any(not recs for recs in weekly.values()):
        raise RaggedCounties(f"counties cover unequal week ranges: {sorted(ranges)}")

    train, val, test = {}, {}, {}
    for fips, recs in weekly.items():
        if year_boundaries is not None:
            y1, y2 = year_boundaries
            train[fips] = [r for r in recs if r.week_end.year <= y1]
            val[fips] = [r for r in recs if y1 < r.week_end.year <= y2]
            test[fips] = [r for r in recs if r.week_end.year > y2]
        else:
            t = len(recs)
            # tolerance keeps 0.7*10 from flooring to 6
            a = int(np.floor(ratios[0] * t + 1e-9))
            b = int(np.floor((ratios[0] + ratios[1]) * t + 1e-9))
            train[fips] = recs[:a]
            val[fips] = recs[a:b]
            test[fips] = recs[b:]
    for split in (train, val, test):
        if any(not recs for recs in split.values()):
            raise DegenerateSplit("a split came out empty for at least one county")
    return SplitDataset(train, val, test)


def fit_normalizer(split):
    """Per-feature mean/std over every county-week in one split."""
    rows = [feature_row(r) for recs in split.values() for r in recs]
    if not rows:
        raise EmptySplit("cannot fit a normalizer on an empty split")
    mat = np.asarray(rows)
    return NormalizationStats(mean=mat.mean(axis=0), std=mat.std(axis=0))


def apply_normalizer(split, stats):
    """Z-score every input feature; zero-variance features map to 0.

    The raw drought score is preserved on each record (raw_score) so
    labels and the persistence baseline stay in 0-5 units.
    """
    std = np.where(stats.std > 0, stats.std, 1.0)
    out = {}
    for fips, recs in split.items():
        new = []
        for r in recs:
            row = (feature_row(r) - stats.mean) / std
            row[stats.std == 0] = 0.0
            weather = {var: row[j] for j, var in enumerate(WEATHER_VARS)}
            new.append(replace(
                r, weather=weather,
                score=row[SCORE_FEATURE],
                latitude=row[SCORE_FEATURE + 1],
                longitude=row[SCORE_FEATURE + 2],
                month=row[SCORE_FEATURE + 3],
                raw_score=_label_score(r),
            ))
        out[fips] = new
    return out


def make_windows(records, spec):
    """Slide an (m, n) window over one county's gap-free weekly series.

    Yields max(0, T - m - n + 1) samples; feature row t of a sample is
    week anchor - m + 1 + t, label k is week anchor + 1 + k.
    """
    t = len(records)
    m, n = spec.m, spec.n
    if t < m + n:
        return []
    mat = np.asarray([feature_row(r) for r in records])
    raw = np.asarray([_label_score(r) for r in records])
    samples = []
    for a in range(m - 1, t - n):
        samples.append(WindowSample(
            fips=records[a].fips,
            anchor=records[a].week_index,
            features=mat[a - m + 1:a + 1],
            labels=raw[a + 1:a + 1 + n],
            window_scores=raw[a - m + 1:a + 1],
        ))
    return samples


def consolidate(per_county):
    """Merge per-county sample lists into one statewide list.

    Accepts {fips: [samples]} or an iterable of lists; output is sorted
    by (fips, anchor) for deterministic downstream order.
    """
    if isinstance(per_county, dict):
        groups = per_county.values()
    else:
        groups = per_county
    merged = [s for group in groups for s in group]
    merged.sort(key=lambda s: (s.fips, s.anchor))
    return merged


def flatten(sample):
    """Row-major flatten: oldest week first, features in FEATURE_NAMES order."""
    return sample.features.reshape(-1)


def flat_feature_names(m):
    """Names for the flattened layout: week offset -(m-1)..0 per feature."""
    names = []
    for t in range(m):
        lag = m - 1 - t
        names.extend(f"{f}[t-{lag}]" for f in FEATURE_NAMES)
    return names


def windows_for_split(split, spec, stats=None):
    """Normalize (optionally) then window and consolidate one split."""
    data = split if stats is None else apply_normalizer(split, stats)
    return consolidate({f: make_windows(recs, spec) for f, recs in data.items()})


def save_windows_csv(samples, path):
    """Columnar CSV: fips, anchor, m*F feature cells, n label cells."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if samples:
            m, f = samples[0].features.shape
            n = len(samples[0].labels)
            header = (["fips", "anchor"]
                      + [f"f{i}" for i in range(m * f)]
                      + [f"y{k}" for k in range(n)])
            writer.writerow(header)
        for s in samples:
            writer.writerow([s.fips, s.anchor,
                             *(repr(float(v)) for v in s.features.reshape(-1)),
                             *(repr(float(v)) for v in s.labels)])


def load_windows_csv(path, spec):
    """Inverse of save_windows_csv for a known WindowSpec."""
    samples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return samples
        for row in reader:
            fips, anchor = int(row[0]), int(row[1])
            vals = np.asarray([float(v) for v in row[2:]])
            feats = vals[:spec.m * N_FEATURES].reshape(spec.m, N_FEATURES)
            labels = vals[spec.m * N_FEATURES:]
            samples.append(WindowSample(fips, anchor, feats, labels))
    return samples
