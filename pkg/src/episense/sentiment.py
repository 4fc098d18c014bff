"""Tweet sentiment scoring and aggregation into daily values."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Mapping

from episense.concepts import ConceptMatch, tokenize
from episense.corpus import date_range
from episense.errors import (
    CoverageGap,
    DuplicateDate,
    DuplicateId,
    EmptyFile,
    InvalidRange,
    MalformedRow,
    MissingScore,
    OutOfRangeScore,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Lexicon:
    weights: Mapping[str, float]
    negators: frozenset[str] = field(default_factory=frozenset)
    negation_window: int = 3

    def __post_init__(self) -> None:
        if self.negation_window < 1:
            raise ValueError("negation_window must be >= 1")
        for tok, w in self.weights.items():
            if not math.isfinite(w):
                raise ValueError(f"non-finite weight for {tok!r}")
        overlap = sorted(self.negators & set(self.weights))
        if overlap:
            log.warning("negators also carry weights: %s", ", ".join(overlap))


def load_lexicon(text: str, negation_window: int = 3) -> Lexicon:
    """Read ``token<TAB>weight`` lines; ``!token`` lines declare negators."""
    weights: dict[str, float] = {}
    negators: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if s.startswith("!"):
            negators.add(s[1:].strip().lower())
            continue
        tok, sep, raw = s.partition("\t")
        if not sep:
            raise MalformedRow(lineno, "expected token<TAB>weight")
        try:
            w = float(raw)
        except ValueError:
            raise MalformedRow(lineno, f"bad weight {raw!r}") from None
        if not -1.0 <= w <= 1.0:
            raise OutOfRangeScore(lineno)
        tok = tok.strip().lower()
        if tok in weights:
            raise MalformedRow(lineno, f"duplicate token {tok!r}")
        weights[tok] = w
    return Lexicon(weights, frozenset(negators), negation_window)


def score_tweet(lex: Lexicon, text: str) -> float:
    """Mean weight of the lexicon tokens in ``text`` with negation flips, clamped to [-1, 1]."""
    tokens = tokenize(text, ())
    matched = []
    for i, tok in enumerate(tokens):
        w = lex.weights.get(tok)
        if w is None:
            continue
        if any(prev in lex.negators for prev in tokens[max(0, i - lex.negation_window) : i]):
            w = -w
        matched.append(w)
    if not matched:
        return 0.0
    return min(1.0, max(-1.0, math.fsum(matched) / len(matched)))


def load_precomputed(text: str) -> dict[str, float]:
    """Read externally computed ``tweet_id,score`` rows."""
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None:
        raise EmptyFile("score CSV")
    if tuple(h.strip() for h in header) != ("tweet_id", "score"):
        raise MalformedRow(1, "expected header tweet_id,score")
    scores: dict[str, float] = {}
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        line = reader.line_num
        if len(row) != 2:
            raise MalformedRow(line, "expected 2 fields")
        tid = row[0].strip()
        try:
            score = float(row[1])
        except ValueError:
            raise MalformedRow(line, f"bad score {row[1]!r}") from None
        if not -1.0 <= score <= 1.0:
            raise OutOfRangeScore(line)
        if tid in scores:
            raise DuplicateId(tid)
        scores[tid] = score
    return scores


def scores_csv(scores: Mapping[str, float]) -> str:
    return "tweet_id,score\n" + "".join(f"{tid},{s!r}\n" for tid, s in scores.items())


@dataclass(frozen=True)
class DailySentiment:
    start_date: date
    values: tuple[float, ...]
    coverage: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.coverage):
            raise ValueError("values and coverage must have equal length")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=len(self.values) - 1)

    def dates(self) -> list[date]:
        return [self.start_date + timedelta(days=i) for i in range(len(self.values))]

    def value_at(self, day: date) -> float:
        i = (day - self.start_date).days
        if not 0 <= i < len(self.values):
            raise CoverageGap(day)
        return self.values[i]

    def to_csv(self) -> str:
        rows = (f"{d.isoformat()},{v!r},{c}\n" for d, v, c in zip(self.dates(), self.values, self.coverage))
        return "date,value,coverage\n" + "".join(rows)


def parse_daily_csv(text: str) -> DailySentiment:
    reader = csv.reader(io.StringIO(text, newline=""))
    rows: dict[date, tuple[float, int]] = {}
    header_seen = False
    for row in reader:
        if not row or row[0].lstrip().startswith("#"):
            continue
        line = reader.line_num
        if not header_seen:
            if tuple(h.strip() for h in row) != ("date", "value", "coverage"):
                raise MalformedRow(line, "expected header date,value,coverage")
            header_seen = True
            continue
        if len(row) != 3:
            raise MalformedRow(line, "expected 3 fields")
        try:
            day = date.fromisoformat(row[0].strip())
            value = float(row[1])
            cov = int(row[2])
        except ValueError as exc:
            raise MalformedRow(line, str(exc)) from None
        if not -1.0 <= value <= 1.0:
            raise OutOfRangeScore(line)
        if cov < 0:
            raise MalformedRow(line, "negative coverage")
        if day in rows:
            raise DuplicateDate(day)
        rows[day] = (value, cov)
    if not rows:
        raise EmptyFile("daily sentiment CSV")
    days = sorted(rows)
    for day in date_range(days[0], days[-1]):
        if day not in rows:
            raise CoverageGap(day)
    return DailySentiment(days[0], tuple(rows[d][0] for d in days), tuple(rows[d][1] for d in days))


def daily_sentiment(
    matches: Iterable[ConceptMatch],
    scores: Mapping[str, float],
    start: date,
    end: date,
    *,
    per_tweet: bool = False,
    carry_forward: bool = False,
) -> DailySentiment:
    """Average matched-tweet scores per local day over ``[start, end]``.

    By default every concept match counts, so a tweet matched to k concepts
    contributes its score k times. ``per_tweet`` counts each tweet once per day.
    Days without matches get 0, or the previous day's value with ``carry_forward``
    (coverage stays 0 on those days).
    """
    if start > end:
        raise InvalidRange(start, end)
    days = date_range(start, end)
    per_day: dict[date, list[float]] = {d: [] for d in days}
    seen: set[tuple[date, str]] = set()
    for m in matches:
        if m.tweet_id not in scores:
            raise MissingScore(m.tweet_id)
        if m.local_date not in per_day:
            continue
        if per_tweet:
            key = (m.local_date, m.tweet_id)
            if key in seen:
                continue
            seen.add(key)
        per_day[m.local_date].append(scores[m.tweet_id])

    values: list[float] = []
    coverage: list[int] = []
    prev = 0.0
    for d in days:
        bucket = per_day[d]
        if bucket:
            # fsum is exactly rounded, so match order cannot change the result
            value = min(1.0, max(-1.0, math.fsum(bucket) / len(bucket)))
            prev = value
        else:
            value = prev if carry_forward else 0.0
        values.append(value)
        coverage.append(len(bucket))
    return DailySentiment(start, tuple(values), tuple(coverage))
