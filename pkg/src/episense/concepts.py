"""Embedding-based matching of tweets against causal-network concepts."""

from __future__ import annotations

import csv
import io
import math
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from episense.corpus import TweetRecord, local_date
from episense.errors import (
    ConfigError,
    DataError,
    DimensionMismatch,
    DuplicateToken,
    HeaderMismatch,
    InvalidRange,
    MalformedRow,
    UnembeddableConcept,
    ZeroVector,
)

DEFAULT_STOPWORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because been
    before being below between both but by can could did do does doing down during
    each few for from further had has have having he her here hers herself him
    himself his how i if in into is it its itself just me more most my myself no
    nor of off on once only or other our ours ourselves out over own same she
    should so some such than that the their theirs them themselves then there
    these they this those through to too under until up very was we were what
    when where which while who whom why will with would you your yours yourself
    yourselves rt amp via
    """.split()
)

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_WORD_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class EmbeddingStore:
    dimension: int
    table: Mapping[str, np.ndarray]

    def get(self, token: str) -> np.ndarray | None:
        return self.table.get(token.lower())

    def __contains__(self, token: str) -> bool:
        return token.lower() in self.table

    def __len__(self) -> int:
        return len(self.table)


def load_embeddings(text: str) -> EmbeddingStore:
    """Read a ``count dim`` header followed by ``token v1 ... vd`` lines."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise HeaderMismatch("empty file")
    head = lines[0].split()
    try:
        count, dim = (int(x) for x in head)
    except ValueError:
        raise HeaderMismatch(f"expected '<count> <dimension>', got {lines[0]!r}") from None
    if count < 0 or dim < 1:
        raise HeaderMismatch(f"invalid header {lines[0]!r}")
    if len(lines) - 1 != count:
        raise HeaderMismatch(f"header declares {count} tokens, file has {len(lines) - 1}")

    table: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if lineno == 1 or not line.strip():
            continue
        parts = line.split()
        token, raw = parts[0].lower(), parts[1:]
        if len(raw) != dim:
            raise DimensionMismatch(lineno, dim, len(raw))
        try:
            vec = np.array([float(x) for x in raw])
        except ValueError:
            raise MalformedRow(lineno, "non-numeric vector component") from None
        if not np.all(np.isfinite(vec)):
            raise MalformedRow(lineno, "non-finite vector component")
        if token in table:
            raise DuplicateToken(token)
        table[token] = vec
    return EmbeddingStore(dim, table)


def tokenize(text: str, stopwords: Iterable[str] = DEFAULT_STOPWORDS) -> list[str]:
    """Lowercase word tokens with URLs, mentions, stopwords and numbers removed.

    Hashtags keep their text (``#COVID19`` becomes ``covid19``). Tokens shorter
    than two characters are dropped.
    """
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = text.replace("#", " ").lower()
    return [
        tok
        for tok in _WORD_RE.findall(text)
        if len(tok) >= 2 and not tok.isdigit() and not tok.isnumeric() and tok not in stop
    ]


def phrase_candidates(tokens: Sequence[str], max_ngram: int = 3) -> list[str]:
    """Contiguous n-grams, all unigrams first, then bigrams, and so on up to ``max_ngram``.

    Within one n the order is left to right; repeats keep their first position.
    """
    if max_ngram < 1:
        raise ConfigError(f"max_ngram must be >= 1, got {max_ngram}")
    seen: dict[str, None] = {}
    for n in range(1, max_ngram + 1):
        for i in range(len(tokens) - n + 1):
            seen.setdefault(" ".join(tokens[i : i + n]), None)
    return list(seen)


def embed_phrase(store: EmbeddingStore, phrase: str) -> np.ndarray | None:
    vecs = [v for v in (store.get(tok) for tok in phrase.split()) if v is not None]
    if not vecs:
        return None
    return np.mean(vecs, axis=0)


def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatch(None, u.shape[0], v.shape[0])
    nu = math.sqrt(float(np.dot(u, u)))
    nv = math.sqrt(float(np.dot(v, v)))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector()
    sim = float(np.dot(u, v)) / (nu * nv)
    return min(1.0, max(-1.0, sim))


@dataclass(frozen=True)
class ConceptSet:
    concepts: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self) -> None:
        if not self.concepts:
            raise DataError("concept set is empty")
        names = [name for name, _ in self.concepts]
        if len(set(names)) != len(names):
            raise DataError("concept names must be unique")
        dims = {len(vec) for _, vec in self.concepts}
        if len(dims) != 1:
            raise DataError("concept vectors must share one dimension")

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.concepts]


def load_concept_set(text: str, store: EmbeddingStore, stopwords: Iterable[str] = DEFAULT_STOPWORDS) -> ConceptSet:
    """Read ``name<TAB>optional phrase override`` lines and embed each concept."""
    concepts = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        name, _, override = line.partition("\t")
        name = name.strip()
        if not name:
            raise MalformedRow(lineno, "empty concept name")
        if name in seen:
            raise MalformedRow(lineno, f"duplicate concept {name!r}")
        seen.add(name)
        phrase = " ".join(tokenize(override.strip() or name, stopwords))
        vec = embed_phrase(store, phrase)
        if vec is None:
            raise UnembeddableConcept(name)
        concepts.append((name, vec))
    return ConceptSet(tuple(concepts))


@dataclass(frozen=True)
class ConceptMatch:
    tweet_id: str
    concept: str
    similarity: float
    matched_phrase: str
    local_date: date


@dataclass(frozen=True)
class MatcherConfig:
    threshold: float = 0.45
    max_ngram: int = 3
    stopwords: frozenset[str] = field(default=DEFAULT_STOPWORDS)
    whole_tweet: bool = False

    def validate(self) -> None:
        if not 0 < self.threshold <= 1:
            raise ConfigError(f"threshold must lie in (0, 1], got {self.threshold}")
        if self.max_ngram < 1:
            raise ConfigError(f"max_ngram must be >= 1, got {self.max_ngram}")


CandidateGenerator = Callable[[Sequence[str], int], list[str]]


def match_concepts(
    tweet: TweetRecord,
    store: EmbeddingStore,
    concept_set: ConceptSet,
    cfg: MatcherConfig | None = None,
    *,
    utc_offset_minutes: int = 0,
    candidates: CandidateGenerator = phrase_candidates,
) -> list[ConceptMatch]:
    """Match one tweet against every concept, keeping each concept's best phrase.

    A match is emitted when the best similarity reaches ``cfg.threshold``
    (inclusive). Ties go to the phrase that comes first in candidate order.
    Results are sorted by concept name.
    """
    cfg = cfg or MatcherConfig()
    tokens = tokenize(tweet.text, cfg.stopwords)
    if cfg.whole_tweet:
        phrases = [" ".join(tokens)] if tokens else []
    else:
        phrases = candidates(tokens, cfg.max_ngram)

    embedded = []
    for phrase in phrases:
        vec = embed_phrase(store, phrase)
        if vec is not None and np.any(vec):
            embedded.append((phrase, vec))
    if not embedded:
        return []

    day = local_date(tweet.timestamp, utc_offset_minutes)
    out = []
    for name, cvec in sorted(concept_set.concepts, key=lambda c: c[0]):
        if not np.any(cvec):
            continue
        best_phrase, best_sim = None, -math.inf
        for phrase, vec in embedded:
            sim = cosine(vec, cvec)
            if sim > best_sim:
                best_phrase, best_sim = phrase, sim
        if best_sim >= cfg.threshold:
            out.append(ConceptMatch(tweet.id, name, best_sim, best_phrase, day))
    return out


def match_corpus(
    tweets: Sequence[TweetRecord],
    store: EmbeddingStore,
    concept_set: ConceptSet,
    cfg: MatcherConfig | None = None,
    *,
    utc_offset_minutes: int = 0,
    workers: int = 1,
) -> list[ConceptMatch]:
    """Match every tweet; output follows tweet input order whatever ``workers`` is."""
    cfg = cfg or MatcherConfig()
    cfg.validate()

    def one(t: TweetRecord) -> list[ConceptMatch]:
        return match_concepts(t, store, concept_set, cfg, utc_offset_minutes=utc_offset_minutes)

    if workers <= 1:
        per_tweet = [one(t) for t in tweets]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_tweet = list(pool.map(one, tweets))
    return [m for matches in per_tweet for m in matches]


MATCH_HEADER = ("tweet_id", "local_date", "concept", "similarity", "matched_phrase")


def matches_csv(matches: Iterable[ConceptMatch]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MATCH_HEADER)
    for m in matches:
        writer.writerow([m.tweet_id, m.local_date.isoformat(), m.concept, f"{m.similarity:.6f}", m.matched_phrase])
    return out.getvalue()


def parse_matches_csv(text: str) -> list[ConceptMatch]:
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != MATCH_HEADER:
        raise MalformedRow(1, "expected header " + ",".join(MATCH_HEADER))
    out = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(MATCH_HEADER):
            raise MalformedRow(reader.line_num, f"expected {len(MATCH_HEADER)} fields")
        try:
            out.append(ConceptMatch(row[0], row[2], float(row[3]), row[4], date.fromisoformat(row[1])))
        except ValueError as exc:
            raise MalformedRow(reader.line_num, str(exc)) from None
    return out


@dataclass(frozen=True)
class ConceptCloud:
    period: tuple[date, date]
    counts: Mapping[str, int]

    def ordered(self) -> list[tuple[str, int]]:
        """Concepts by count descending, ties broken by name."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def total(self) -> int:
        return sum(self.counts.values())

    def to_csv(self) -> str:
        return "concept,count\n" + "".join(f"{name},{n}\n" for name, n in self.ordered())


def concept_cloud(
    matches: Iterable[ConceptMatch],
    start: date,
    end: date,
    concepts: Iterable[str] = (),
) -> ConceptCloud:
    """Count matches per concept over ``[start, end]``; ``concepts`` seeds zero entries."""
    if start > end:
        raise InvalidRange(start, end)
    counts: Counter[str] = Counter({name: 0 for name in concepts})
    for m in matches:
        if start <= m.local_date <= end:
            counts[m.concept] += 1
    return ConceptCloud((start, end), dict(counts))
