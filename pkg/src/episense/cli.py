"""Command-line front end.

Subcommands: diverge, concepts, sentiment, fit, report, explain, synth.
Exit codes: 0 success, 2 data error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from datetime import date
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from episense import __version__
from episense.concepts import (
    DEFAULT_STOPWORDS,
    MatcherConfig,
    concept_cloud,
    load_concept_set,
    load_embeddings,
    match_corpus,
    matches_csv,
    parse_matches_csv,
)
from episense.corpus import bucket_by_day, case_csv, parse_case_csv, parse_tweets_json, tweets_json
from episense.errors import ConfigError, DataError, EpisenseError
from episense.explain import explain_top_concepts, explanations_json, load_graph, trigger_dot
from episense.regress import (
    REFERENCE_HORIZONS,
    FitConfig,
    FitResult,
    build_design,
    evaluate_horizons,
    forecast_errors,
    ols_fit,
    render_table,
    rmse,
)
from episense.sentiment import (
    daily_sentiment,
    load_lexicon,
    load_precomputed,
    parse_daily_csv,
    score_tweet,
    scores_csv,
)
from episense.series import DailySeries, DivergenceConfig, divergence_point
from episense.svg import line_chart
from episense.synth import (
    SynthConfig,
    generate,
    generate_divergence_pair,
    generate_tweets,
    pair_as_cases,
)

EXIT_OK, EXIT_DATA, EXIT_CONFIG = 0, 2, 3


class InputMissing(DataError):
    def __init__(self, path: str) -> None:
        self.path = path
        super().__init__(f"cannot read input file {path}")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so bad flags map to exit 3."""

    def error(self, message: str):  # type: ignore[override]
        raise ConfigError(f"{self.prog}: {message}")


# -- helpers --------------------------------------------------------------


def _iso_date(raw: str) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO-8601 date: {raw!r}") from None


def _bundled(name: str) -> str:
    return str(resources.files("episense.data").joinpath(name))


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError:
        raise InputMissing(path) from None


def _digest(path: str) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError:
        raise InputMissing(path) from None


def _write(path: str | os.PathLike, text: str) -> None:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _jsonable(value):
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_manifest(args: argparse.Namespace, inputs: Sequence[str], outputs: Sequence[str]) -> None:
    config = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("func", "config")}
    manifest = {
        "command": args.command,
        "config": config,
        "inputs": {p: _digest(p) for p in inputs},
        "outputs": list(outputs),
        "tool_version": __version__,
    }
    _write(str(outputs[0]) + ".manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _check_range(start: date, end: date) -> None:
    if start > end:
        raise ConfigError(f"--from {start} is after --to {end}")


# -- commands -------------------------------------------------------------


def cmd_diverge(args: argparse.Namespace) -> int:
    cfg = DivergenceConfig(
        scale_a=args.scale_a,
        scale_b=args.scale_b,
        normalize=not args.no_normalize,
        window_days=args.window,
        threshold=args.threshold,
        persistence_days=args.persistence,
    )
    cfg.validate()
    a_cases = parse_case_csv(_read(args.a), args.label_a, zero_fill=args.zero_fill)
    b_cases = parse_case_csv(_read(args.b), args.label_b, zero_fill=args.zero_fill)
    a = DailySeries.of(a_cases.start_date, a_cases.new_cases)
    b = DailySeries.of(b_cases.start_date, b_cases.new_cases)
    if args.date_from or args.date_to:
        try:
            a = a.clip(args.date_from, args.date_to)
            b = b.clip(args.date_from, args.date_to)
        except ValueError as exc:
            raise DataError(str(exc)) from None
    report = divergence_point(a, b, cfg)
    doc = {"a": args.label_a, "b": args.label_b, **report.to_dict()}
    _write(args.out, _dump_json(doc))
    outputs = [args.out]
    if args.svg:
        scaled = [
            (f"{args.label_a} x{cfg.scale_a:g}", DailySeries.of(a.start_date, [v * cfg.scale_a for v in a.values])),
            (f"{args.label_b} x{cfg.scale_b:g}", DailySeries.of(b.start_date, [v * cfg.scale_b for v in b.values])),
        ]
        _write(args.svg, line_chart(scaled, title=f"{args.label_a} vs {args.label_b}", marker=report.divergence_date))
        outputs.append(args.svg)
    _write_manifest(args, [args.a, args.b], outputs)
    print(report.divergence_date.isoformat() if report.divergence_date else "none")
    return EXIT_OK


def cmd_concepts(args: argparse.Namespace) -> int:
    _check_range(args.date_from, args.date_to)
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    cfg = MatcherConfig(threshold=args.threshold, max_ngram=args.max_ngram, whole_tweet=args.whole_tweet)
    cfg.validate()
    tweets = parse_tweets_json(_read(args.tweets))
    store = load_embeddings(_read(args.embeddings))
    concept_set = load_concept_set(_read(args.concepts), store, DEFAULT_STOPWORDS)
    buckets = bucket_by_day(tweets, args.region, args.utc_offset, args.date_from, args.date_to)
    keep = {tid for ids in buckets.buckets.values() for tid in ids}
    selected = [t for t in tweets if t.id in keep]
    matches = match_corpus(
        selected, store, concept_set, cfg, utc_offset_minutes=args.utc_offset, workers=args.workers
    )
    _write(args.out, matches_csv(matches))
    outputs = [args.out]
    if args.cloud_out:
        cloud = concept_cloud(matches, args.date_from, args.date_to, concept_set.names)
        _write(args.cloud_out, cloud.to_csv())
        outputs.append(args.cloud_out)
    _write_manifest(args, [args.tweets, args.embeddings, args.concepts], outputs)
    print(f"{len(selected)} tweets, {len(matches)} concept matches")
    return EXIT_OK


def cmd_sentiment(args: argparse.Namespace) -> int:
    _check_range(args.date_from, args.date_to)
    matches = parse_matches_csv(_read(args.matches))
    inputs = [args.matches]
    if args.scores:
        scores = load_precomputed(_read(args.scores))
        inputs.append(args.scores)
    else:
        if not args.tweets:
            raise ConfigError("either --scores or --tweets is required")
        lex = load_lexicon(_read(args.lexicon), args.negation_window)
        tweets = parse_tweets_json(_read(args.tweets))
        matched = {m.tweet_id for m in matches}
        scores = {t.id: score_tweet(lex, t.text) for t in tweets if t.id in matched}
        inputs += [args.tweets, args.lexicon]
    daily = daily_sentiment(
        matches, scores, args.date_from, args.date_to, per_tweet=args.per_tweet, carry_forward=args.carry_forward
    )
    _write(args.out, daily.to_csv())
    outputs = [args.out]
    if args.scores_out:
        _write(args.scores_out, scores_csv(scores))
        outputs.append(args.scores_out)
    _write_manifest(args, inputs, outputs)
    print(f"{sum(daily.coverage)} matches over {len(daily)} days")
    return EXIT_OK


def _fit_config(args: argparse.Namespace, horizon: int, with_sentiment: bool) -> FitConfig:
    cfg = FitConfig(
        train_from=args.train_from,
        train_to=args.train_to,
        horizon_days=horizon,
        with_sentiment=with_sentiment,
        alpha=args.alpha,
        intercept=not args.no_intercept,
        cumulative_sentiment=args.cumulative_sentiment,
    )
    cfg.validate()
    return cfg


def cmd_fit(args: argparse.Namespace) -> int:
    with_sent = not args.without_sentiment
    cfg = _fit_config(args, args.horizon, with_sent)
    if with_sent and not args.sentiment:
        raise ConfigError("--sentiment is required unless --without-sentiment is given")
    cases = parse_case_csv(_read(args.cases), args.region)
    sent = parse_daily_csv(_read(args.sentiment)) if args.sentiment else None
    fit = ols_fit(build_design(cases, sent if with_sent else None, cfg), cfg.intercept)
    doc = {"region": args.region, **fit.to_dict()}
    doc["significant"] = fit.significant(cfg.alpha)
    doc["config"] = {
        "train_from": cfg.train_from.isoformat(),
        "train_to": cfg.train_to.isoformat(),
        "horizon_days": cfg.horizon_days,
        "with_sentiment": cfg.with_sentiment,
        "alpha": cfg.alpha,
        "intercept": cfg.intercept,
        "cumulative_sentiment": cfg.cumulative_sentiment,
    }
    try:
        pred, actual = forecast_errors(cases, sent if with_sent else None, cfg, fit)
        doc["forecast"] = {"rmse": rmse(pred, actual), "predicted": pred.tolist(), "actual": actual.tolist()}
    except DataError as exc:
        doc["forecast"] = {"error": str(exc)}
    notes = []
    if cfg.horizon_days not in REFERENCE_HORIZONS:
        notes.append(f"horizon {cfg.horizon_days} is outside the reference horizons 3, 7, 14")
    doc["notes"] = notes
    _write(args.out, _dump_json(doc))
    inputs = [args.cases] + ([args.sentiment] if args.sentiment else [])
    _write_manifest(args, inputs, [args.out])
    for note in notes:
        print(f"note: {note}")
    print(f"n={fit.n} rmse_train={fit.rmse_train:.4f} adj_r2={fit.adj_r2:.4f}")
    return EXIT_OK


def _parse_horizons(raw: str) -> list[int]:
    try:
        hs = [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --horizons {raw!r}") from None
    if not hs or any(h < 1 for h in hs):
        raise ConfigError("horizons must be positive integers")
    return hs


def cmd_report(args: argparse.Namespace) -> int:
    horizons = _parse_horizons(args.horizons)
    base = _fit_config(args, max(horizons), True)
    cases = parse_case_csv(_read(args.cases), args.region)
    sent = parse_daily_csv(_read(args.sentiment))
    report = evaluate_horizons(cases, sent, base, horizons)
    _write(args.out, report.to_csv())
    outputs = [args.out]
    if args.table_out:
        _write(args.table_out, render_table(report))
        outputs.append(args.table_out)
    _write_manifest(args, [args.cases, args.sentiment], outputs)
    color = sys.stdout.isatty() and not os.environ.get("EPISENSE_NO_COLOR")
    sys.stdout.write(render_table(report, color=color))
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    _check_range(args.date_from, args.date_to)
    if args.k < 1 or args.max_depth < 1:
        raise ConfigError("--k and --max-depth must be >= 1")
    matches = parse_matches_csv(_read(args.matches))
    scores = load_precomputed(_read(args.scores))
    try:
        fit = FitResult.from_dict(json.loads(_read(args.fit)))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"{args.fit} is not a fit document: {exc}") from None
    graph = load_graph(_read(args.graph))
    cloud = concept_cloud(matches, args.date_from, args.date_to)
    explanations = explain_top_concepts(cloud, matches, scores, fit, graph, args.k, args.max_depth)
    _write(args.out, explanations_json(explanations))
    outputs = [args.out]
    if args.dot:
        _write(args.dot, trigger_dot(graph, explanations))
        outputs.append(args.dot)
    _write_manifest(args, [args.matches, args.scores, args.fit, args.graph], outputs)
    for e in explanations:
        trig = ", ".join(n for n, _ in e.triggers) or "-"
        print(f"{e.concept}: {e.influence_score:.6g} <- {trig}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    if args.divergence_pair:
        a, b = generate_divergence_pair(
            args.seed, args.split_day, args.days, ramp_height=args.ramp_height, start_date=args.start_date
        )
        header = [f"generator=splitmix64 seed={args.seed} split_day={args.split_day} days={args.days} ramp_height={args.ramp_height}"]
        pa, pb = out_dir / "pair_a.csv", out_dir / "pair_b.csv"
        _write(pa, case_csv(pair_as_cases(a, "a"), header))
        _write(pb, case_csv(pair_as_cases(b, "b"), header))
        _write_manifest(args, [], [str(pa), str(pb)])
        print(f"wrote {pa} and {pb}")
        return EXIT_OK

    cfg = SynthConfig(
        seed=args.seed,
        days=args.days,
        beta_cases=args.beta_cases,
        beta_recovered=args.beta_recovered,
        beta_sentiment=args.beta_sentiment,
        noise_sd=args.noise_sd,
        sentiment_process=args.sentiment_process,
        lag_days=args.lag,
        start_date=args.start_date,
        region_id=args.region,
    )
    cases, sent = generate(cfg)
    paths = [out_dir / "cases.csv", out_dir / "sentiment.csv", out_dir / "tweets.jsonl"]
    _write(paths[0], case_csv(cases, [cfg.header()]))
    _write(paths[1], f"# {cfg.header()}\n" + sent.to_csv())
    tweets = generate_tweets(args.seed, sent, args.region, args.tweets_per_day, args.utc_offset)
    _write(paths[2], tweets_json(tweets))
    _write_manifest(args, [], [str(p) for p in paths])
    print(f"wrote {len(cases)} days and {len(tweets)} tweets to {out_dir}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------


def _add_window(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--from", dest="date_from", type=_iso_date, required=required, help="first day (inclusive)")
    p.add_argument("--to", dest="date_to", type=_iso_date, required=required, help="last day (inclusive)")


def _add_train(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cases", required=True, help="case CSV (date,new_cases,recovered,deaths)")
    p.add_argument("--region", default="region", help="region label")
    p.add_argument("--train-from", type=_iso_date, default=FitConfig.train_from)
    p.add_argument("--train-to", type=_iso_date, default=FitConfig.train_to)
    p.add_argument("--alpha", type=float, default=0.1, help="one-tailed t-test significance level")
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--cumulative-sentiment", action="store_true", help="use the running sum of daily sentiment")


def build_parser() -> _Parser:
    parser = _Parser(prog="episense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, func: Callable, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", help="key = value file supplying flag defaults")
        p.set_defaults(func=func)
        return p

    p = add("diverge", cmd_diverge, "find the date two regional curves stop tracking each other")
    p.add_argument("--a", required=True, help="case CSV for region A")
    p.add_argument("--b", required=True, help="case CSV for region B")
    p.add_argument("--label-a", default="a")
    p.add_argument("--label-b", default="b")
    p.add_argument("--scale-a", type=float, default=1.0)
    p.add_argument("--scale-b", type=float, default=1.0)
    p.add_argument("--no-normalize", action="store_true", help="skip min-max normalization")
    p.add_argument("--window", type=int, default=7, help="trailing window in days")
    p.add_argument("--threshold", type=float, default=0.1, help="difference threshold in (0, 1)")
    p.add_argument("--persistence", type=int, default=7, help="days the difference must stay above threshold")
    p.add_argument("--zero-fill", action="store_true", help="fill missing interior dates with zeros")
    _add_window(p, required=False)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--svg", help="optional SVG chart path")

    p = add("concepts", cmd_concepts, "match tweets to causal-network concepts")
    p.add_argument("--tweets", required=True, help="newline-delimited JSON tweets")
    p.add_argument("--embeddings", default=_bundled("toy_embeddings.txt"))
    p.add_argument("--concepts", default=_bundled("concepts.tsv"))
    p.add_argument("--region", required=True)
    p.add_argument("--utc-offset", type=int, default=330, help="minutes east of UTC for local dates")
    _add_window(p)
    p.add_argument("--threshold", type=float, default=0.45)
    p.add_argument("--max-ngram", type=int, default=3)
    p.add_argument("--whole-tweet", action="store_true", help="match one mean vector per tweet")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="matches CSV path")
    p.add_argument("--cloud-out", help="concept cloud CSV path")

    p = add("sentiment", cmd_sentiment, "aggregate matched-tweet sentiment into daily values")
    p.add_argument("--matches", required=True)
    p.add_argument("--tweets", help="tweets to score with the lexicon")
    p.add_argument("--lexicon", default=_bundled("lexicon.tsv"))
    p.add_argument("--negation-window", type=int, default=3)
    p.add_argument("--scores", help="precomputed tweet_id,score CSV (overrides the lexicon)")
    _add_window(p)
    p.add_argument("--per-tweet", action="store_true", help="count each tweet once per day")
    p.add_argument("--carry-forward", action="store_true", help="repeat the last value on empty days")
    p.add_argument("--out", required=True, help="daily sentiment CSV path")
    p.add_argument("--scores-out", help="write per-tweet scores CSV")

    p = add("fit", cmd_fit, "fit one OLS model")
    _add_train(p)
    p.add_argument("--sentiment", help="daily sentiment CSV")
    p.add_argument("--horizon", type=int, default=14)
    p.add_argument("--without-sentiment", action="store_true")
    p.add_argument("--out", required=True, help="fit JSON path")

    p = add("report", cmd_report, "with/without sentiment RMSE and adjR2 per horizon")
    _add_train(p)
    p.add_argument("--sentiment", required=True)
    p.add_argument("--horizons", default="3,7,14")
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--table-out", help="text table path")

    p = add("explain", cmd_explain, "rank influential concepts and list their causal triggers")
    p.add_argument("--matches", required=True)
    p.add_argument("--scores", required=True, help="tweet_id,score CSV")
    p.add_argument("--fit", required=True, help="fit JSON with a sentiment coefficient")
    p.add_argument("--graph", default=_bundled("helbing_sars.json"))
    _add_window(p)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--max-depth", type=int, default=3)
    p.add_argument("--out", required=True, help="explanations JSON path")
    p.add_argument("--dot", help="Graphviz file for the trigger subgraph")

    p = add("synth", cmd_synth, "generate seeded synthetic inputs")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--days", type=int, default=80)
    p.add_argument("--start-date", type=_iso_date, default=SynthConfig.start_date)
    p.add_argument("--region", default="synthetic")
    p.add_argument("--beta-cases", type=float, default=SynthConfig.beta_cases)
    p.add_argument("--beta-recovered", type=float, default=SynthConfig.beta_recovered)
    p.add_argument("--beta-sentiment", type=float, default=SynthConfig.beta_sentiment)
    p.add_argument("--noise-sd", type=float, default=SynthConfig.noise_sd)
    p.add_argument("--sentiment-process", choices=("iid_uniform", "random_walk"), default="iid_uniform")
    p.add_argument("--lag", type=int, default=SynthConfig.lag_days, help="days between features and their effect")
    p.add_argument("--tweets-per-day", type=int, default=4)
    p.add_argument("--utc-offset", type=int, default=330)
    p.add_argument("--divergence-pair", action="store_true", help="emit a pair of curves for diverge instead")
    p.add_argument("--split-day", type=int, default=30)
    p.add_argument("--ramp-height", type=float, default=0.8)
    p.add_argument("--out-dir", required=True)

    parser._subparsers_by_name = sub.choices  # type: ignore[attr-defined]
    return parser


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(_read(path).splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        key, sep, value = s.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        values[key.strip().replace("-", "_")] = value.strip().strip('"')
    return values


def _apply_config(parser: _Parser, argv: list[str]) -> None:
    """Flag > config file > built-in default: config values become parser defaults."""
    if not argv or argv[0] not in parser._subparsers_by_name:  # type: ignore[attr-defined]
        return
    sub = parser._subparsers_by_name[argv[0]]  # type: ignore[attr-defined]
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv[1:])
    if not known.config:
        return
    values = _load_config_file(known.config)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config", "func"):
            raise ConfigError(f"{known.config}: unknown key {key!r} for {argv[0]}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{known.config}: {key} expects a boolean")
            defaults[key] = raw.lower() in ("true", "1", "yes")
        else:
            # argparse applies the action's type to string defaults
            defaults[key] = raw
            action.required = False
    sub.set_defaults(**defaults)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"episense: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EpisenseError as exc:
        print(f"episense: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
