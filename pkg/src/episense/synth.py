"""Seeded synthetic data for exercising the pipeline without real tweets.

Random numbers come from SplitMix64 (Steele, Lea & Flood 2014):

    state += 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)                      (all arithmetic mod 2**64)

A uniform double is ``(out >> 11) * 2**-53``. Gaussian noise is the
Irwin-Hall approximation ``sum of 12 uniforms - 6`` (mean 0, sd 1), so every
step is IEEE-754 addition or multiplication and the output is bit-identical
on any conforming platform.

Case recurrence, with lag ``L = cfg.lag_days`` and ``t = u - L``::

    new(u) = max(0, round(initial + beta_cases*C(t) + beta_recovered*R(t)
                          + beta_sentiment*s(t)*sentiment_scale + noise_sd*z))
    recovered(u) = floor(RECOVERY_FRACTION * new(u - RECOVERY_LAG))

where ``C`` and ``R`` are cumulative new and recovered counts. Days before
``L`` use ``new(u) = max(0, round(initial + noise_sd*z))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Sequence

from episense.corpus import RegionSeries, TweetRecord
from episense.errors import InvalidConfig
from episense.sentiment import DailySentiment
from episense.series import DailySeries

MASK64 = (1 << 64) - 1
RECOVERY_FRACTION = 0.6
RECOVERY_LAG = 10
PRNG_NAME = "splitmix64"


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def uniform_range(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def gauss(self) -> float:
        total = 0.0
        for _ in range(12):
            total += self.uniform()
        return total - 6.0

    def below(self, n: int) -> int:
        """Integer in [0, n) by rejection, free of modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 1
    days: int = 80
    beta_cases: float = 0.02
    beta_recovered: float = -0.01
    beta_sentiment: float = 1.0
    noise_sd: float = 2.0
    sentiment_process: str = "iid_uniform"
    lag_days: int = 7
    initial_cases: float = 20.0
    sentiment_scale: float = 20.0
    start_date: date = date(2020, 3, 15)
    region_id: str = "synthetic"
    random_walk_step: float = 0.25

    def validate(self) -> None:
        if not 0 <= self.seed <= MASK64:
            raise InvalidConfig(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.days < 45:
            raise InvalidConfig(f"days must be >= 45, got {self.days}")
        if self.noise_sd < 0:
            raise InvalidConfig(f"noise_sd must be >= 0, got {self.noise_sd}")
        if self.sentiment_process not in ("iid_uniform", "random_walk"):
            raise InvalidConfig(f"unknown sentiment process {self.sentiment_process!r}")
        if not 1 <= self.lag_days < self.days:
            raise InvalidConfig(f"lag_days must lie in [1, days), got {self.lag_days}")
        for name in ("beta_cases", "beta_recovered", "beta_sentiment", "initial_cases", "sentiment_scale"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidConfig(f"{name} must be finite")

    def header(self) -> str:
        fields = asdict(self)
        fields["start_date"] = self.start_date.isoformat()
        return f"generator={PRNG_NAME} " + json.dumps(fields, sort_keys=True)


def _sentiment_path(rng: SplitMix64, cfg: SynthConfig) -> list[float]:
    if cfg.sentiment_process == "iid_uniform":
        return [rng.uniform_range(-1.0, 1.0) for _ in range(cfg.days)]
    out, s = [], 0.0
    for _ in range(cfg.days):
        s = min(1.0, max(-1.0, s + rng.uniform_range(-cfg.random_walk_step, cfg.random_walk_step)))
        out.append(s)
    return out


def generate(cfg: SynthConfig) -> tuple[RegionSeries, DailySentiment]:
    """Generate a case series whose new cases are driven by lagged features and sentiment."""
    cfg.validate()
    rng = SplitMix64(cfg.seed)
    sent = _sentiment_path(rng, cfg)
    new: list[int] = []
    rec: list[int] = []
    cum_new = cum_rec = 0.0
    cum_new_hist: list[float] = []
    cum_rec_hist: list[float] = []
    for u in range(cfg.days):
        noise = cfg.noise_sd * rng.gauss()
        if u < cfg.lag_days:
            level = cfg.initial_cases + noise
        else:
            t = u - cfg.lag_days
            level = (
                cfg.initial_cases
                + cfg.beta_cases * cum_new_hist[t]
                + cfg.beta_recovered * cum_rec_hist[t]
                + cfg.beta_sentiment * sent[t] * cfg.sentiment_scale
                + noise
            )
        n_u = max(0, int(round(level)))
        r_u = int(math.floor(RECOVERY_FRACTION * new[u - RECOVERY_LAG])) if u >= RECOVERY_LAG else 0
        new.append(n_u)
        rec.append(r_u)
        cum_new += n_u
        cum_rec += r_u
        cum_new_hist.append(cum_new)
        cum_rec_hist.append(cum_rec)
    cases = RegionSeries(cfg.region_id, cfg.start_date, tuple(new), tuple(rec), tuple(0 for _ in new))
    daily = DailySentiment(cfg.start_date, tuple(sent), tuple(1 for _ in sent))
    return cases, daily


def generate_divergence_pair(
    seed: int,
    split_day: int,
    days: int,
    *,
    ramp_height: float = 0.8,
    ramp_days: int = 5,
    peak: float = 100.0,
    noise_sd: float = 3.0,
    start_date: date = date(2020, 3, 15),
) -> tuple[DailySeries, DailySeries]:
    """Two curves sharing one noisy first wave; A gains a second wave after ``split_day``.

    The shared baseline is a Gaussian bump of height ``peak`` centred at
    ``days // 5``. From ``split_day + 1`` onward, A adds a ramp rising to
    ``ramp_height * peak`` over ``ramp_days`` days and then holding. Before
    and on ``split_day`` the two curves are identical. ``ramp_height=0``
    gives two identical curves.
    """
    if not 0 < split_day < days:
        raise InvalidConfig(f"need 0 < split_day < days, got split_day={split_day}, days={days}")
    if ramp_days < 1 or ramp_height < 0 or noise_sd < 0 or peak <= 0:
        raise InvalidConfig("ramp_days >= 1, ramp_height >= 0, noise_sd >= 0 and peak > 0 required")
    rng = SplitMix64(seed)
    centre = days // 5
    width = days / 6.0
    base = []
    for i in range(days):
        level = peak * math.exp(-(((i - centre) / width) ** 2)) + noise_sd * rng.gauss()
        base.append(float(max(0, int(round(level)))))
    a = []
    for i, v in enumerate(base):
        if i > split_day:
            v += float(int(round(ramp_height * peak * min(1.0, (i - split_day) / ramp_days))))
        a.append(v)
    return DailySeries.of(start_date, a), DailySeries.of(start_date, base)


def pair_as_cases(series: DailySeries, region_id: str) -> RegionSeries:
    counts = tuple(int(v) for v in series.values)
    zeros = tuple(0 for _ in counts)
    return RegionSeries(region_id, series.start_date, counts, zeros, zeros)


# -- toy tweets -----------------------------------------------------------

# phrases drawn from the bundled concept vocabulary
TOPIC_PHRASES: tuple[str, ...] = (
    "lockdown extended again",
    "overextension of lockdown",
    "no jobs and unemployment rising",
    "daily wage workers lost work",
    "mental health and anxiety",
    "people need therapy",
    "hospitals are overloaded",
    "church hospitals open beds",
    "medical care shortage",
    "masks distributed today",
    "mask distribution drive",
    "rumors spreading online",
    "fake news and rumors",
    "mistrust of government",
    "people lose trust in authorities",
    "wedding gathering crowd",
    "religious gathering",
    "social unrest and instability",
    "panic buying and fear",
    "virus transmission spreading",
    "containment zones sealed",
    "tourism collapsed",
)
POSITIVE_WORDS: tuple[str, ...] = ("good", "hope", "safe", "grateful", "recovering", "great")
NEGATIVE_WORDS: tuple[str, ...] = ("bad", "terrible", "worried", "sad", "angry", "awful")


def generate_tweets(
    seed: int,
    sentiment: DailySentiment,
    region_id: str,
    per_day: int = 4,
    utc_offset_minutes: int = 330,
) -> list[TweetRecord]:
    """Toy geotagged tweets whose polarity tracks ``sentiment`` in expectation.

    Each tweet pairs one topic phrase with one polar word; the word is
    positive with probability ``(1 + s) / 2`` for that day's sentiment ``s``.
    Timestamps fall at local noon plus a few minutes per tweet.
    """
    rng = SplitMix64(seed ^ 0x5EED)
    tweets = []
    for day_index, (day, s) in enumerate(zip(sentiment.dates(), sentiment.values)):
        for j in range(per_day):
            phrase = TOPIC_PHRASES[rng.below(len(TOPIC_PHRASES))]
            pool = POSITIVE_WORDS if rng.uniform() < (1.0 + s) / 2.0 else NEGATIVE_WORDS
            word = pool[rng.below(len(pool))]
            local_noon = datetime(day.year, day.month, day.day, 12, 0, tzinfo=timezone.utc)
            ts = local_noon - timedelta(minutes=utc_offset_minutes) + timedelta(minutes=7 * j)
            tid = f"{region_id}-{day_index:04d}-{j:02d}"
            tweets.append(TweetRecord(tid, ts, region_id, f"{phrase} {word} #covid19"))
    return tweets


def sentiment_variance_share(cases: RegionSeries, sent: DailySentiment, cfg: SynthConfig, days: Sequence[date]) -> float:
    """Share of new-case variance over ``days`` carried by the sentiment term of the recurrence."""
    contrib, target = [], []
    for u in days:
        i = (u - cases.start_date).days
        t = i - cfg.lag_days
        if t < 0:
            continue
        contrib.append(cfg.beta_sentiment * sent.values[t] * cfg.sentiment_scale)
        target.append(float(cases.new_cases[i]))

    def var(xs: list[float]) -> float:
        m = math.fsum(xs) / len(xs)
        return math.fsum((x - m) ** 2 for x in xs) / len(xs)

    vt = var(target)
    return var(contrib) / vt if vt > 0 else 0.0
