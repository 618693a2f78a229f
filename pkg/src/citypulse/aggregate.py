"""Descriptive statistics over tweet streams: temporal volume, user activity, entity metadata.

Every statistic is built from a fold whose ``merge`` is plain counter
addition, so shards can be aggregated separately and combined exactly.
Quartiles use the Tukey exclusive-median rule: for odd ``n`` the median is
left out of both halves, and q1/q3 are the medians of the lower/upper half.
Weekdays are numbered Monday = 0.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .textprep import localize_timestamp

ENTITY_KINDS = ("hashtags", "user_mentions", "urls", "media")


def _median(sorted_xs: Sequence[float]) -> float:
    n = len(sorted_xs)
    mid = n // 2
    if n % 2:
        return float(sorted_xs[mid])
    return (sorted_xs[mid - 1] + sorted_xs[mid]) / 2.0


@dataclass(frozen=True)
class FiveNumberSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    iqr: float

    @classmethod
    def of(cls, values: Iterable[float]) -> "FiveNumberSummary":
        xs = sorted(values)
        n = len(xs)
        if n == 0:
            raise ValueError("summary of an empty sample")
        if n == 1:
            v = float(xs[0])
            return cls(v, v, v, v, v, 0.0)
        half = n // 2
        q1 = _median(xs[:half])
        q3 = _median(xs[half + (n % 2):])
        return cls(float(xs[0]), q1, _median(xs), q3, float(xs[-1]), q3 - q1)

    def row(self) -> List[float]:
        return [self.min, self.q1, self.median, self.q3, self.max, self.iqr]


@dataclass
class TemporalFold:
    """(local date, local hour) -> tweet count."""

    utc_offset_minutes: int = 0
    cells: Counter = field(default_factory=Counter)

    def add(self, created_at_utc) -> None:
        local = localize_timestamp(created_at_utc, self.utc_offset_minutes)
        self.cells[(local.date(), local.hour)] += 1

    def update(self, records) -> "TemporalFold":
        for r in records:
            self.add(r.created_at_utc)
        return self

    def merge(self, other: "TemporalFold") -> "TemporalFold":
        if other.utc_offset_minutes != self.utc_offset_minutes:
            raise ValueError("cannot merge folds with different UTC offsets")
        return TemporalFold(self.utc_offset_minutes, self.cells + other.cells)

    def dates(self) -> List[date]:
        """Every calendar date from the first to the last observed one."""
        if not self.cells:
            return []
        seen = [d for d, _ in self.cells]
        first, last = min(seen), max(seen)
        return [first + timedelta(days=i) for i in range((last - first).days + 1)]


@dataclass
class TemporalStats:
    daily: List[Tuple[date, int]]
    weekday: Dict[int, Optional[FiveNumberSummary]]
    hour: Dict[int, Optional[FiveNumberSummary]]

    @property
    def total(self) -> int:
        return sum(c for _, c in self.daily)


def temporal_from_fold(fold: TemporalFold) -> TemporalStats:
    days = fold.dates()
    per_day = Counter()
    for (d, _), c in fold.cells.items():
        per_day[d] += c
    daily = [(d, per_day[d]) for d in days]
    by_weekday: Dict[int, List[int]] = {w: [] for w in range(7)}
    for d, c in daily:
        by_weekday[d.weekday()].append(c)
    weekday = {w: FiveNumberSummary.of(v) if v else None for w, v in by_weekday.items()}
    hour = {
        h: FiveNumberSummary.of([fold.cells.get((d, h), 0) for d in days]) if days else None
        for h in range(24)
    }
    return TemporalStats(daily, weekday, hour)


def temporal_stats(records, utc_offset_minutes: int = 0) -> TemporalStats:
    """Daily series over the whole observed date range (gaps count as zero days),
    weekday summaries over same-weekday daily counts, and hour summaries over
    same-hour counts of every day in the range."""
    return temporal_from_fold(TemporalFold(utc_offset_minutes).update(records))


@dataclass
class UserFold:
    posts: Counter = field(default_factory=Counter)

    def update(self, records) -> "UserFold":
        for r in records:
            self.posts[r.user_id] += 1
        return self

    def merge(self, other: "UserFold") -> "UserFold":
        return UserFold(self.posts + other.posts)


@dataclass
class UserActivity:
    posts: Dict[str, int]
    histogram: Dict[int, int]
    cumulative: List[Tuple[int, float]]

    @property
    def n_users(self) -> int:
        return len(self.posts)

    def loglog_points(self) -> List[Tuple[float, float]]:
        return [(math.log10(n), math.log10(u)) for n, u in sorted(self.histogram.items()) if n > 0 and u > 0]


def activity_from_fold(fold: UserFold) -> UserActivity:
    hist = Counter(fold.posts.values())
    total = len(fold.posts)
    cumulative = []
    running = 0
    for n in sorted(hist):
        running += hist[n]
        cumulative.append((n, running / total))
    return UserActivity(dict(fold.posts), dict(sorted(hist.items())), cumulative)


def user_activity(records) -> UserActivity:
    return activity_from_fold(UserFold().update(records))


@dataclass
class MetadataFold:
    total: int = 0
    with_kind: Counter = field(default_factory=Counter)

    def update(self, records) -> "MetadataFold":
        for r in records:
            self.total += 1
            for kind in ENTITY_KINDS:
                if getattr(r.entities, kind) >= 1:
                    self.with_kind[kind] += 1
        return self

    def merge(self, other: "MetadataFold") -> "MetadataFold":
        return MetadataFold(self.total + other.total, self.with_kind + other.with_kind)


@dataclass(frozen=True)
class KindShare:
    count: int
    percentage: float


def composition_from_fold(fold: MetadataFold) -> Dict[str, KindShare]:
    return {
        k: KindShare(fold.with_kind[k], 100.0 * fold.with_kind[k] / fold.total if fold.total else 0.0)
        for k in ENTITY_KINDS
    }


def metadata_composition(records) -> Dict[str, KindShare]:
    """Tweets carrying at least one entity of each kind, with percentages of all tweets."""
    return composition_from_fold(MetadataFold().update(records))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


def summary_rows(summaries: Dict[int, Optional[FiveNumberSummary]]):
    for key, s in sorted(summaries.items()):
        yield [key] + (["", "", "", "", "", ""] if s is None else [_fmt(v) for v in s.row()])


def daily_csv(stats: TemporalStats) -> str:
    return _csv(["date", "count"], [[d.isoformat(), c] for d, c in stats.daily])


def weekday_csv(stats: TemporalStats) -> str:
    return _csv(["weekday", "min", "q1", "median", "q3", "max", "iqr"], summary_rows(stats.weekday))


def hour_csv(stats: TemporalStats) -> str:
    return _csv(["hour", "min", "q1", "median", "q3", "max", "iqr"], summary_rows(stats.hour))


def user_activity_csv(act: UserActivity) -> str:
    return _csv(["posts", "users"], sorted(act.histogram.items()))


def metadata_csv(comp: Dict[str, KindShare]) -> str:
    return _csv(["kind", "count", "pct"], [[k, v.count, f"{v.percentage:.2f}"] for k, v in comp.items()])
