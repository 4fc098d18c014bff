"""Exception hierarchy.

Every error raised by the library is an :class:`EpisenseError`.  The CLI maps
:class:`DataError` to exit code 2 and :class:`ConfigError` to exit code 3.
"""

from __future__ import annotations


class EpisenseError(Exception):
    """Base class for all library errors."""


class DataError(EpisenseError):
    """Input data is malformed or inconsistent."""


class ConfigError(EpisenseError):
    """A parameter or flag value is invalid."""


# -- corpus ---------------------------------------------------------------


class EmptyFile(DataError):
    def __init__(self, what: str = "document") -> None:
        super().__init__(f"empty {what}")


class MalformedRow(DataError):
    def __init__(self, line: int, reason: str = "") -> None:
        self.line = line
        msg = f"malformed row at line {line}"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class NegativeCount(DataError):
    def __init__(self, line: int) -> None:
        self.line = line
        super().__init__(f"negative count at line {line}")


class DateGap(DataError):
    def __init__(self, date) -> None:
        self.date = date
        super().__init__(f"missing date {date}")


class DuplicateDate(DataError):
    def __init__(self, date) -> None:
        self.date = date
        super().__init__(f"duplicate date {date}")


class MalformedLine(DataError):
    def __init__(self, line: int, reason: str = "") -> None:
        self.line = line
        msg = f"malformed line {line}"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class MissingField(DataError):
    def __init__(self, name: str, line: int) -> None:
        self.name = name
        self.line = line
        super().__init__(f"missing field {name!r} at line {line}")


class DuplicateId(DataError):
    def __init__(self, id_: str) -> None:
        self.id = id_
        super().__init__(f"duplicate id {id_!r}")


class InvalidRange(ConfigError):
    def __init__(self, start, end) -> None:
        self.start = start
        self.end = end
        super().__init__(f"invalid date range {start}..{end}")


# -- series ---------------------------------------------------------------


class NonPositiveFactor(ConfigError):
    def __init__(self, factor: float) -> None:
        self.factor = factor
        super().__init__(f"scale factor must be > 0, got {factor}")


class InsufficientOverlap(DataError):
    def __init__(self, overlap: int, needed: int) -> None:
        self.overlap = overlap
        self.needed = needed
        super().__init__(f"series overlap {overlap} days, need at least {needed}")


# -- concepts -------------------------------------------------------------


class HeaderMismatch(DataError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"embedding header mismatch: {reason}")


class DimensionMismatch(DataError):
    def __init__(self, line: int | None = None, expected: int | None = None, got: int | None = None) -> None:
        self.line = line
        where = f" at line {line}" if line is not None else ""
        super().__init__(f"dimension mismatch{where}: expected {expected}, got {got}")


class DuplicateToken(DataError):
    def __init__(self, token: str) -> None:
        self.token = token
        super().__init__(f"duplicate token {token!r}")


class ZeroVector(DataError):
    def __init__(self) -> None:
        super().__init__("cosine undefined for an all-zero vector")


class UnembeddableConcept(DataError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"concept {name!r} has no in-vocabulary tokens")


# -- sentiment ------------------------------------------------------------


class OutOfRangeScore(DataError):
    def __init__(self, line: int) -> None:
        self.line = line
        super().__init__(f"score outside [-1, 1] at line {line}")


class MissingScore(DataError):
    def __init__(self, tweet_id: str) -> None:
        self.tweet_id = tweet_id
        super().__init__(f"no sentiment score for tweet {tweet_id!r}")


# -- regress --------------------------------------------------------------


class CoverageGap(DataError):
    def __init__(self, date) -> None:
        self.date = date
        super().__init__(f"series does not cover {date}")


class TooFewRows(DataError):
    def __init__(self, rows: int, needed: int) -> None:
        self.rows = rows
        self.needed = needed
        super().__init__(f"{rows} rows, need at least {needed}")


class RankDeficient(DataError):
    def __init__(self, condition: float) -> None:
        self.condition = condition
        super().__init__(f"design matrix is rank deficient (condition {condition:.3g})")


class LengthMismatch(DataError):
    def __init__(self, a: int, b: int) -> None:
        super().__init__(f"length mismatch: {a} vs {b}")


class EmptyInput(DataError):
    def __init__(self) -> None:
        super().__init__("empty input")


class DegenerateDof(DataError):
    def __init__(self, n: int, p: int) -> None:
        super().__init__(f"no residual degrees of freedom (n={n}, p={p})")


# -- explain --------------------------------------------------------------


class UnknownEndpoint(DataError):
    def __init__(self, edge) -> None:
        self.edge = tuple(edge)
        super().__init__(f"edge {self.edge} references an unknown node")


class SelfLoop(DataError):
    def __init__(self, node: str) -> None:
        self.node = node
        super().__init__(f"self loop on {node!r}")


class DuplicateEdge(DataError):
    def __init__(self, edge) -> None:
        self.edge = tuple(edge)
        super().__init__(f"duplicate edge {self.edge}")


class UnknownConcept(DataError):
    def __init__(self, concept: str) -> None:
        self.concept = concept
        super().__init__(f"unknown concept {concept!r}")


class NoSentimentCoefficient(DataError):
    def __init__(self) -> None:
        super().__init__("fit has no sentiment coefficient")


class EmptyCloud(DataError):
    def __init__(self) -> None:
        super().__init__("concept cloud has no matches")


# -- synth ----------------------------------------------------------------


class InvalidConfig(ConfigError):
    pass
