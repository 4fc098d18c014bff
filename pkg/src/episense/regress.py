"""Multivariate OLS forecasting of daily new cases with and without sentiment.

Features at day ``t`` are cumulative new cases, cumulative recoveries and
(optionally) the day's sentiment; the target is new cases at ``t + horizon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from typing import Iterable, Mapping, Sequence

import numpy as np

from episense.corpus import RegionSeries
from episense.errors import (
    ConfigError,
    CoverageGap,
    DegenerateDof,
    EmptyInput,
    LengthMismatch,
    RankDeficient,
    TooFewRows,
)
from episense.sentiment import DailySentiment

REFERENCE_HORIZONS = (3, 7, 14)
REFERENCE_RMSE_UNCERTAINTY = 0.129
MAX_CONDITION = 1e10

CUM_NEW = "cum_new"
CUM_RECOVERED = "cum_recovered"
SENTIMENT = "sentiment"
INTERCEPT = "intercept"


@dataclass(frozen=True)
class FitConfig:
    train_from: date = date(2020, 4, 16)
    train_to: date = date(2020, 5, 14)
    horizon_days: int = 14
    with_sentiment: bool = True
    alpha: float = 0.1
    intercept: bool = True
    cumulative_sentiment: bool = False

    def validate(self) -> None:
        if self.horizon_days < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon_days}")
        if self.train_from > self.train_to:
            raise ConfigError(f"train_from {self.train_from} is after train_to {self.train_to}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def feature_names(self) -> tuple[str, ...]:
        names = (CUM_NEW, CUM_RECOVERED)
        return names + (SENTIMENT,) if self.with_sentiment else names


@dataclass(frozen=True)
class DesignRow:
    features: tuple[float, ...]
    target: float
    date: date


@dataclass(frozen=True)
class DesignMatrix:
    rows: tuple[DesignRow, ...]
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        width = len(self.feature_names)
        if any(len(r.features) != width for r in self.rows):
            raise ValueError("every row needs one value per feature name")

    def __len__(self) -> int:
        return len(self.rows)

    def X(self) -> np.ndarray:
        return np.array([r.features for r in self.rows], dtype=float).reshape(len(self.rows), len(self.feature_names))

    def y(self) -> np.ndarray:
        return np.array([r.target for r in self.rows], dtype=float)


class _Features:
    """Per-day feature lookup over a case series and an optional sentiment series."""

    def __init__(self, cases: RegionSeries, sent: DailySentiment | None, cfg: FitConfig) -> None:
        self.cases = cases
        self.sent = sent
        self.cfg = cfg
        self.cum_new = np.cumsum(np.asarray(cases.new_cases, dtype=float))
        self.cum_rec = np.cumsum(np.asarray(cases.recovered, dtype=float))
        if sent is not None:
            vals = np.asarray(sent.values, dtype=float)
            self.sent_vals = np.cumsum(vals) if cfg.cumulative_sentiment else vals

    def _case_index(self, day: date) -> int:
        i = self.cases.index_of(day)
        if i is None:
            raise CoverageGap(day)
        return i

    def row(self, t: date) -> tuple[float, ...]:
        i = self._case_index(t)
        feats = [float(self.cum_new[i]), float(self.cum_rec[i])]
        if self.cfg.with_sentiment:
            if self.sent is None:
                raise CoverageGap(t)
            j = (t - self.sent.start_date).days
            if not 0 <= j < len(self.sent):
                raise CoverageGap(t)
            feats.append(float(self.sent_vals[j]))
        return tuple(feats)

    def new_cases(self, day: date) -> float:
        return float(self.cases.new_cases[self._case_index(day)])


def build_design(cases: RegionSeries, sent: DailySentiment | None, cfg: FitConfig) -> DesignMatrix:
    """One row per day ``t`` in ``[train_from, train_to - horizon]``.

    Cumulative counts run from the start of the case series, not from
    ``train_from``.
    """
    cfg.validate()
    feats = _Features(cases, sent, cfg)
    h = timedelta(days=cfg.horizon_days)
    rows = []
    t = cfg.train_from
    while t + h <= cfg.train_to:
        rows.append(DesignRow(feats.row(t), feats.new_cases(t + h), t))
        t += timedelta(days=1)
    needed = len(cfg.feature_names) + 2
    if len(rows) < needed:
        raise TooFewRows(len(rows), needed)
    return DesignMatrix(tuple(rows), cfg.feature_names)


# -- statistics -----------------------------------------------------------


def rmse(pred: Sequence[float], actual: Sequence[float]) -> float:
    if len(pred) != len(actual):
        raise LengthMismatch(len(pred), len(actual))
    if len(pred) == 0:
        raise EmptyInput()
    return math.sqrt(math.fsum((float(p) - float(a)) ** 2 for p, a in zip(pred, actual)) / len(pred))


def adj_r2(r2: float, n: int, p: int) -> float:
    if n <= p + 1:
        raise DegenerateDof(n, p)
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, 500):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def _betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: int) -> float:
    """P(T <= t) for Student's t with ``df`` degrees of freedom.

    The two-sided tail is I_x(df/2, 1/2) with x = df / (df + t^2), so small
    tails are computed directly instead of as a difference from 1.
    """
    if df < 1 or int(df) != df:
        raise ValueError(f"df must be a positive integer, got {df}")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    half_tail = 0.5 * _betainc(0.5 * df, 0.5, x)
    return 1.0 - half_tail if t > 0 else half_tail


# -- OLS ------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    feature_names: tuple[str, ...]
    coefficients: Mapping[str, float]
    std_errors: Mapping[str, float]
    residuals: tuple[float, ...]
    rmse_train: float
    r2: float
    adj_r2: float
    n: int
    p: int
    df_resid: int
    intercept: bool
    condition: float
    zero_residual_variance: bool = False
    p_values: Mapping[str, float] = field(default_factory=dict)
    reference_rmse_uncertainty: float = REFERENCE_RMSE_UNCERTAINTY

    @property
    def param_names(self) -> tuple[str, ...]:
        return ((INTERCEPT,) if self.intercept else ()) + self.feature_names

    def predict(self, features: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
        X = np.asarray(features, dtype=float).reshape(-1, len(self.feature_names))
        beta = np.array([self.coefficients[name] for name in self.feature_names])
        out = X @ beta
        if self.intercept:
            out = out + self.coefficients[INTERCEPT]
        return out

    def significant(self, alpha: float = 0.1) -> dict[str, bool]:
        return {name: pv < alpha for name, pv in self.p_values.items()}

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "intercept": self.intercept,
            "coefficients": {k: self.coefficients[k] for k in self.param_names},
            "std_errors": {k: self.std_errors[k] for k in self.param_names},
            "p_values": {k: self.p_values[k] for k in self.param_names},
            "metrics": {
                "n": self.n,
                "p": self.p,
                "df_resid": self.df_resid,
                "rmse_train": self.rmse_train,
                "r2": self.r2,
                "adj_r2": self.adj_r2,
                "condition": self.condition,
                "zero_residual_variance": self.zero_residual_variance,
                "reference_rmse_uncertainty": self.reference_rmse_uncertainty,
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FitResult":
        m = d["metrics"]
        return cls(
            feature_names=tuple(d["feature_names"]),
            coefficients=dict(d["coefficients"]),
            std_errors=dict(d["std_errors"]),
            residuals=(),
            rmse_train=m["rmse_train"],
            r2=m["r2"],
            adj_r2=m["adj_r2"],
            n=m["n"],
            p=m["p"],
            df_resid=m["df_resid"],
            intercept=d["intercept"],
            condition=m["condition"],
            zero_residual_variance=m["zero_residual_variance"],
            p_values=dict(d["p_values"]),
        )


def _back_substitute(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    k = R.shape[0]
    x = np.zeros_like(b, dtype=float)
    for i in range(k - 1, -1, -1):
        x[i] = (b[i] - R[i, i + 1 :] @ x[i + 1 :]) / R[i, i]
    return x


def _design_array(X: np.ndarray, intercept: bool) -> np.ndarray:
    if intercept:
        return np.column_stack([np.ones(X.shape[0]), X])
    return X


def ols_fit(X: DesignMatrix, intercept: bool = True) -> FitResult:
    """Least-squares fit via Householder QR on column-equilibrated data."""
    A = _design_array(X.X(), intercept)
    y = X.y()
    n, k = A.shape
    p = len(X.feature_names)
    if n < p + 2:
        raise TooFewRows(n, p + 2)

    norms = np.sqrt(np.einsum("ij,ij->j", A, A))
    if np.any(norms == 0):
        raise RankDeficient(math.inf)
    As = A / norms
    sv = np.linalg.svd(As, compute_uv=False)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if condition > MAX_CONDITION:
        raise RankDeficient(condition)

    Q, R = np.linalg.qr(As, mode="reduced")
    beta_s = _back_substitute(R, Q.T @ y)
    beta = beta_s / norms

    resid = y - A @ beta
    rss = math.fsum(float(r) ** 2 for r in resid)
    if intercept:
        ybar = math.fsum(y.tolist()) / n
        tss = math.fsum((float(v) - ybar) ** 2 for v in y)
    else:
        tss = math.fsum(float(v) ** 2 for v in y)
    scale_y = max(1.0, float(np.linalg.norm(y)))
    zero_var = math.sqrt(rss) <= 1e-12 * scale_y * math.sqrt(n)
    if zero_var:
        r2 = 1.0
    elif tss == 0.0:
        r2 = 0.0
    else:
        r2 = 1.0 - rss / tss

    df = n - k
    sigma2 = rss / df if df > 0 else math.nan
    Rinv = _back_substitute_matrix(R)
    cov_s = Rinv @ Rinv.T
    se = np.sqrt(np.clip(np.diag(cov_s), 0.0, None) * (0.0 if zero_var else sigma2)) / norms

    names = ((INTERCEPT,) if intercept else ()) + tuple(X.feature_names)
    fit = FitResult(
        feature_names=tuple(X.feature_names),
        coefficients={name: float(b) for name, b in zip(names, beta)},
        std_errors={name: float(s) for name, s in zip(names, se)},
        residuals=tuple(float(r) for r in resid),
        rmse_train=math.sqrt(rss / n),
        r2=r2,
        adj_r2=adj_r2(r2, n, p),
        n=n,
        p=p,
        df_resid=df,
        intercept=intercept,
        condition=condition,
        zero_residual_variance=zero_var,
    )
    return replace(fit, p_values=coef_t_test(fit))


def _back_substitute_matrix(R: np.ndarray) -> np.ndarray:
    k = R.shape[0]
    eye = np.eye(k)
    return np.column_stack([_back_substitute(R, eye[:, j]) for j in range(k)])


def coef_t_test(fit: FitResult) -> dict[str, float]:
    """One-tailed p-values for H0: beta = 0, tested in the direction of each estimate's sign.

    A fit with zero residual variance reports p = 0 for every coefficient;
    ``fit.zero_residual_variance`` flags that case.
    """
    if fit.df_resid < 1:
        raise DegenerateDof(fit.n, fit.p)
    out = {}
    for name in fit.param_names:
        if fit.zero_residual_variance:
            out[name] = 0.0
            continue
        beta = fit.coefficients[name]
        se = fit.std_errors[name]
        if beta == 0.0:
            out[name] = 0.5
            continue
        t = abs(beta) / se if se > 0 else math.inf
        out[name] = max(0.0, 1.0 - t_cdf(t, fit.df_resid))
    return out


# -- horizon evaluation ---------------------------------------------------


@dataclass(frozen=True)
class VariantScore:
    rmse: float
    adj_r2: float


@dataclass(frozen=True)
class HorizonEntry:
    horizon: int
    with_sentiment: VariantScore
    without_sentiment: VariantScore
    fits: Mapping[str, FitResult] = field(default_factory=dict, compare=False, repr=False)


@dataclass(frozen=True)
class HorizonReport:
    region: str
    entries: tuple[HorizonEntry, ...]

    def to_csv(self) -> str:
        lines = ["horizon,variant,rmse,adj_r2"]
        for e in self.entries:
            lines.append(f"{e.horizon},with_sentiment,{e.with_sentiment.rmse:.6f},{e.with_sentiment.adj_r2:.6f}")
            lines.append(f"{e.horizon},without_sentiment,{e.without_sentiment.rmse:.6f},{e.without_sentiment.adj_r2:.6f}")
        return "\n".join(lines) + "\n"


def forecast_errors(cases: RegionSeries, sent: DailySentiment | None, cfg: FitConfig, fit: FitResult) -> tuple[np.ndarray, np.ndarray]:
    """Predictions and observations for the ``horizon`` days after ``train_to``.

    Each target day ``u`` is predicted from the observed features at
    ``u - horizon``, all of which fall inside the training window.
    """
    feats = _Features(cases, sent, cfg)
    h = cfg.horizon_days
    pred, actual = [], []
    for i in range(1, h + 1):
        u = cfg.train_to + timedelta(days=i)
        t = u - timedelta(days=h)
        pred.append(float(fit.predict([feats.row(t)])[0]))
        actual.append(feats.new_cases(u))
    return np.array(pred), np.array(actual)


def evaluate_horizons(
    cases: RegionSeries,
    sent: DailySentiment | None,
    base_cfg: FitConfig | None = None,
    horizons: Iterable[int] = REFERENCE_HORIZONS,
) -> HorizonReport:
    """Fit with and without sentiment per horizon and score the out-of-sample forecasts.

    Rows come out in descending horizon order (14, 7, 3 by default).
    """
    base_cfg = base_cfg or FitConfig()
    hs = sorted(set(int(h) for h in horizons), reverse=True)
    entries = []
    for h in hs:
        scores = {}
        fits = {}
        for variant in (True, False):
            cfg = replace(base_cfg, horizon_days=h, with_sentiment=variant)
            fit = ols_fit(build_design(cases, sent if variant else None, cfg), cfg.intercept)
            pred, actual = forecast_errors(cases, sent if variant else None, cfg, fit)
            key = "with_sentiment" if variant else "without_sentiment"
            scores[key] = VariantScore(rmse(pred, actual), fit.adj_r2)
            fits[key] = fit
        entries.append(HorizonEntry(h, scores["with_sentiment"], scores["without_sentiment"], fits))
    return HorizonReport(cases.region_id, tuple(entries))


def render_table(report: HorizonReport, color: bool = False) -> str:
    """Plain-text table: one row per horizon, with/without sentiment side by side."""
    bold = ("\x1b[1m", "\x1b[0m") if color else ("", "")
    title = f"RMSE and adjR2 with and without sentiment: {report.region}"
    head1 = f"{'Time period':<14}| {'With Sentiment':^19} | {'Without Sentiment':^19}"
    head2 = f"{'for Prediction':<14}| {'RMSE':>9} {'adjR2':>9} | {'RMSE':>9} {'adjR2':>9}"
    rule = "-" * len(head1)
    lines = [title, rule, bold[0] + head1 + bold[1], bold[0] + head2 + bold[1], rule]
    for e in report.entries:
        w, wo = e.with_sentiment, e.without_sentiment
        label = f"{e.horizon} Days"
        lines.append(f"{label:<14}| {w.rmse:>9.2f} {w.adj_r2:>9.2f} | {wo.rmse:>9.2f} {wo.adj_r2:>9.2f}")
    lines.append(rule)
    return "\n".join(lines) + "\n"
