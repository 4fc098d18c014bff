"""Daily series transforms and divergence-point detection for paired regions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Sequence

import numpy as np

from episense.errors import ConfigError, InsufficientOverlap, NonPositiveFactor


@dataclass(frozen=True)
class DailySeries:
    start_date: date
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) < 1:
            raise ValueError("DailySeries needs at least one value")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("DailySeries values must be finite")

    @classmethod
    def of(cls, start_date: date, values: Sequence[float]) -> "DailySeries":
        return cls(start_date, tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=len(self.values) - 1)

    def date_at(self, i: int) -> date:
        return self.start_date + timedelta(days=i)

    def dates(self) -> list[date]:
        return [self.date_at(i) for i in range(len(self.values))]

    def clip(self, start: date | None = None, end: date | None = None) -> "DailySeries":
        """Restrict to ``[start, end]`` (inclusive); either bound may be omitted."""
        lo = 0 if start is None else max(0, (start - self.start_date).days)
        hi = len(self.values) if end is None else min(len(self.values), (end - self.start_date).days + 1)
        if hi <= lo:
            raise ValueError(f"no values between {start} and {end}")
        return DailySeries(self.date_at(lo), self.values[lo:hi])


def cumulative(s: DailySeries) -> DailySeries:
    out: list[float] = []
    total = 0.0
    for v in s.values:
        total += v
        out.append(total)
    return DailySeries(s.start_date, tuple(out))


def scale(s: DailySeries, factor: float) -> DailySeries:
    if not factor > 0:
        raise NonPositiveFactor(factor)
    return DailySeries(s.start_date, tuple(factor * v for v in s.values))


def normalize_minmax(s: DailySeries) -> DailySeries:
    lo, hi = min(s.values), max(s.values)
    if hi == lo:
        return DailySeries(s.start_date, tuple(0.0 for _ in s.values))
    span = hi - lo
    return DailySeries(s.start_date, tuple((v - lo) / span for v in s.values))


@dataclass(frozen=True)
class DivergenceConfig:
    scale_a: float = 1.0
    scale_b: float = 1.0
    normalize: bool = True
    window_days: int = 7
    threshold: float = 0.1
    persistence_days: int = 7

    def validate(self) -> None:
        if not self.scale_a > 0:
            raise NonPositiveFactor(self.scale_a)
        if not self.scale_b > 0:
            raise NonPositiveFactor(self.scale_b)
        if self.window_days < 1:
            raise ConfigError(f"window_days must be >= 1, got {self.window_days}")
        if self.persistence_days < 1:
            raise ConfigError(f"persistence_days must be >= 1, got {self.persistence_days}")
        if not 0 < self.threshold < 1:
            raise ConfigError(f"threshold must lie in (0, 1), got {self.threshold}")


@dataclass(frozen=True)
class DivergenceReport:
    divergence_date: date | None
    difference_trace: DailySeries
    config_used: DivergenceConfig
    overlap: tuple[date, date] = field(default=None)  # type: ignore[assignment]

    def to_dict(self) -> dict:
        cfg = self.config_used
        return {
            "divergence_date": self.divergence_date.isoformat() if self.divergence_date else None,
            "overlap": [self.overlap[0].isoformat(), self.overlap[1].isoformat()],
            "config": {
                "scale_a": cfg.scale_a,
                "scale_b": cfg.scale_b,
                "normalize": cfg.normalize,
                "window_days": cfg.window_days,
                "threshold": cfg.threshold,
                "persistence_days": cfg.persistence_days,
            },
            "difference_trace": {
                "start_date": self.difference_trace.start_date.isoformat(),
                "values": [round(v, 12) for v in self.difference_trace.values],
            },
        }


def align(a: DailySeries, b: DailySeries) -> tuple[date, np.ndarray, np.ndarray]:
    """Return the overlapping date range start and the two aligned value arrays."""
    start = max(a.start_date, b.start_date)
    end = min(a.end_date, b.end_date)
    n = (end - start).days + 1
    if n <= 0:
        return start, np.empty(0), np.empty(0)
    ia = (start - a.start_date).days
    ib = (start - b.start_date).days
    return (
        start,
        np.asarray(a.values[ia : ia + n], dtype=float),
        np.asarray(b.values[ib : ib + n], dtype=float),
    )


def _minmax(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def difference_trace(a: np.ndarray, b: np.ndarray, window: int) -> np.ndarray:
    """Mean absolute difference over each trailing window of ``window`` days."""
    gap = np.abs(a - b)
    return np.array([gap[i - window + 1 : i + 1].mean() for i in range(window - 1, len(gap))])


def first_divergence(trace: Sequence[float], threshold: float, persistence: int) -> int | None:
    """Earliest index whose next ``persistence`` values all exceed ``threshold``.

    The index only qualifies if some earlier value sits at or below the
    threshold, so curves that never tracked each other have no divergence.
    """
    seen_close = False
    for j in range(len(trace) - persistence + 1):
        if seen_close and all(v > threshold for v in trace[j : j + persistence]):
            return j
        if trace[j] <= threshold:
            seen_close = True
    return None


def divergence_point(a: DailySeries, b: DailySeries, cfg: DivergenceConfig | None = None) -> DivergenceReport:
    """Find the date at which two date-aligned curves stop tracking each other.

    Both curves are scaled, optionally min-max normalized over their common
    dates, and compared through a trailing-window mean absolute difference.
    The divergence date is the earliest date from which that difference stays
    above ``cfg.threshold`` for ``cfg.persistence_days`` consecutive days,
    having been at or below it at some earlier date.
    """
    cfg = cfg or DivergenceConfig()
    cfg.validate()
    start, av, bv = align(a, b)
    needed = cfg.window_days + cfg.persistence_days
    if len(av) < needed:
        raise InsufficientOverlap(len(av), needed)

    av = av * cfg.scale_a
    bv = bv * cfg.scale_b
    if cfg.normalize:
        av, bv = _minmax(av), _minmax(bv)

    trace = difference_trace(av, bv, cfg.window_days)
    trace_start = start + timedelta(days=cfg.window_days - 1)
    j = first_divergence(trace.tolist(), cfg.threshold, cfg.persistence_days)
    when = None if j is None else trace_start + timedelta(days=j)
    overlap_end = start + timedelta(days=len(av) - 1)
    return DivergenceReport(when, DailySeries.of(trace_start, trace), cfg, (start, overlap_end))
