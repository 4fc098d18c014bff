"""Input parsing: regional case CSVs, newline-delimited tweet files, day buckets."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Iterable, Sequence

from episense.errors import (
    DateGap,
    DuplicateDate,
    DuplicateId,
    EmptyFile,
    InvalidRange,
    MalformedLine,
    MalformedRow,
    MissingField,
    NegativeCount,
)

CASE_HEADER = ("date", "new_cases", "recovered", "deaths")
TWEET_FIELDS = ("id", "timestamp", "region", "text")


@dataclass(frozen=True)
class RegionSeries:
    """Gap-free daily counts for one region; index ``i`` is ``start_date + i`` days."""

    region_id: str
    start_date: date
    new_cases: tuple[int, ...]
    recovered: tuple[int, ...]
    deaths: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.new_cases)
        if n < 1 or len(self.recovered) != n or len(self.deaths) != n:
            raise ValueError("new_cases, recovered and deaths must share a length >= 1")
        for seq in (self.new_cases, self.recovered, self.deaths):
            if any(v < 0 for v in seq):
                raise ValueError("counts must be non-negative")

    def __len__(self) -> int:
        return len(self.new_cases)

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=len(self) - 1)

    def dates(self) -> list[date]:
        return [self.start_date + timedelta(days=i) for i in range(len(self))]

    def index_of(self, day: date) -> int | None:
        i = (day - self.start_date).days
        return i if 0 <= i < len(self) else None


@dataclass(frozen=True)
class TweetRecord:
    id: str
    timestamp: datetime  # tz-aware, UTC
    region_id: str
    text: str


@dataclass(frozen=True)
class DayBuckets:
    region_id: str
    utc_offset_minutes: int
    buckets: dict[date, list[str]]

    def total(self) -> int:
        return sum(len(ids) for ids in self.buckets.values())


def _parse_count(raw: str, line: int) -> int:
    raw = raw.strip()
    try:
        value = int(raw)
    except ValueError:
        raise MalformedRow(line, f"not an integer count: {raw!r}") from None
    if value < 0:
        raise NegativeCount(line)
    return value


def parse_case_csv(text: str, region_id: str, *, zero_fill: bool = False) -> RegionSeries:
    """Parse a ``date,new_cases,recovered,deaths`` document into a RegionSeries.

    Rows may appear in any order. Lines starting with ``#`` are treated as
    comments (generated files carry provenance there). Interior date gaps raise
    :class:`DateGap` unless ``zero_fill`` is set, in which case the missing days
    are filled with zero counts.
    """
    rows: dict[date, tuple[int, int, int]] = {}
    header_seen = False
    reader = csv.reader(io.StringIO(text, newline=""))
    for record in reader:
        line = reader.line_num
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if record[0].lstrip().startswith("#"):
            continue
        if not header_seen:
            if tuple(field.strip() for field in record) != CASE_HEADER:
                raise MalformedRow(line, "expected header " + ",".join(CASE_HEADER))
            header_seen = True
            continue
        if len(record) != 4:
            raise MalformedRow(line, f"expected 4 fields, got {len(record)}")
        try:
            day = date.fromisoformat(record[0].strip())
        except ValueError:
            raise MalformedRow(line, f"bad date {record[0]!r}") from None
        counts = tuple(_parse_count(field, line) for field in record[1:])
        if day in rows:
            raise DuplicateDate(day)
        rows[day] = counts  # type: ignore[assignment]

    if not header_seen or not rows:
        raise EmptyFile("case CSV")

    days = sorted(rows)
    start, end = days[0], days[-1]
    span = (end - start).days + 1
    new, rec, dead = [], [], []
    for i in range(span):
        day = start + timedelta(days=i)
        if day not in rows:
            if not zero_fill:
                raise DateGap(day)
            counts = (0, 0, 0)
        else:
            counts = rows[day]
        new.append(counts[0])
        rec.append(counts[1])
        dead.append(counts[2])
    return RegionSeries(region_id, start, tuple(new), tuple(rec), tuple(dead))


def case_csv(series: RegionSeries, comments: Sequence[str] = ()) -> str:
    """Serialize a RegionSeries in the format :func:`parse_case_csv` reads."""
    out = io.StringIO()
    for comment in comments:
        out.write(f"# {comment}\n")
    out.write(",".join(CASE_HEADER) + "\n")
    for i, day in enumerate(series.dates()):
        out.write(f"{day.isoformat()},{series.new_cases[i]},{series.recovered[i]},{series.deaths[i]}\n")
    return out.getvalue()


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 instant carrying a zone designator; returns UTC."""
    s = raw.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        raise ValueError("timestamp has no zone")
    return ts.astimezone(timezone.utc)


def parse_tweets_json(text: str) -> list[TweetRecord]:
    """Parse newline-delimited JSON tweet records, preserving file order."""
    tweets: list[TweetRecord] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedLine(lineno, exc.msg) from None
        if not isinstance(obj, dict):
            raise MalformedLine(lineno, "expected a JSON object")
        for name in TWEET_FIELDS:
            if name not in obj:
                raise MissingField(name, lineno)
        id_, ts_raw, region, body = (obj[name] for name in TWEET_FIELDS)
        if not all(isinstance(v, str) for v in (id_, ts_raw, region, body)):
            raise MalformedLine(lineno, "fields must be strings")
        if not id_:
            raise MalformedLine(lineno, "empty id")
        if not body.strip():
            raise MalformedLine(lineno, "empty text")
        try:
            ts = parse_timestamp(ts_raw)
        except ValueError:
            raise MalformedLine(lineno, f"bad timestamp {ts_raw!r}") from None
        if id_ in seen:
            raise DuplicateId(id_)
        seen.add(id_)
        tweets.append(TweetRecord(id_, ts, region, body))
    return tweets


def tweets_json(tweets: Iterable[TweetRecord]) -> str:
    lines = []
    for t in tweets:
        obj = {
            "id": t.id,
            "timestamp": t.timestamp.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            "region": t.region_id,
            "text": t.text,
        }
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def local_date(ts: datetime, utc_offset_minutes: int) -> date:
    return (ts.astimezone(timezone.utc) + timedelta(minutes=utc_offset_minutes)).date()


def date_range(start: date, end: date) -> list[date]:
    return [start + timedelta(days=i) for i in range((end - start).days + 1)]


def bucket_by_day(
    tweets: Sequence[TweetRecord],
    region_id: str,
    utc_offset_minutes: int,
    start: date,
    end: date,
) -> DayBuckets:
    """Group a region's tweets by local calendar date over ``[start, end]`` inclusive.

    Every day in the range gets a (possibly empty) bucket. Within a bucket ids
    are ordered by ``(timestamp, id)``.
    """
    if start > end:
        raise InvalidRange(start, end)
    grouped: dict[date, list[TweetRecord]] = {d: [] for d in date_range(start, end)}
    for t in tweets:
        if t.region_id != region_id:
            continue
        day = local_date(t.timestamp, utc_offset_minutes)
        if start <= day <= end:
            grouped[day].append(t)
    buckets = {
        day: [t.id for t in sorted(items, key=lambda t: (t.timestamp, t.id))]
        for day, items in grouped.items()
    }
    return DayBuckets(region_id, utc_offset_minutes, buckets)
