"""End-to-end toy run over synthetic inputs, driven through the CLI."""

from __future__ import annotations

from pathlib import Path

from episense.cli import main

REGION = "kerala"
SPAN = ("2020-03-15", "2020-06-02")
TRAIN = ("2020-04-16", "2020-05-14")

OUTPUTS = (
    "pair_a.csv",
    "pair_b.csv",
    "divergence.json",
    "divergence.svg",
    "cases.csv",
    "sentiment.csv",
    "tweets.jsonl",
    "matches.csv",
    "cloud.csv",
    "daily_sentiment.csv",
    "scores.csv",
    "fit.json",
    "report.csv",
    "report.txt",
    "explanations.json",
    "triggers.dot",
)


def toy_commands(out_dir: str | Path, workers: int = 1, seed: int = 7) -> list[list[str]]:
    d = Path(out_dir)
    p = lambda name: str(d / name)  # noqa: E731
    return [
        ["synth", "--divergence-pair", "--seed", str(seed), "--days", "60", "--split-day", "30", "--out-dir", str(d)],
        ["diverge", "--a", p("pair_a.csv"), "--b", p("pair_b.csv"), "--label-a", "A", "--label-b", "B",
         "--out", p("divergence.json"), "--svg", p("divergence.svg")],
        ["synth", "--seed", str(seed), "--region", REGION, "--lag", "14", "--tweets-per-day", "12", "--out-dir", str(d)],
        ["concepts", "--tweets", p("tweets.jsonl"), "--region", REGION, "--from", SPAN[0], "--to", SPAN[1],
         "--workers", str(workers), "--out", p("matches.csv"), "--cloud-out", p("cloud.csv")],
        ["sentiment", "--matches", p("matches.csv"), "--tweets", p("tweets.jsonl"), "--from", SPAN[0],
         "--to", SPAN[1], "--out", p("daily_sentiment.csv"), "--scores-out", p("scores.csv")],
        ["fit", "--cases", p("cases.csv"), "--sentiment", p("daily_sentiment.csv"), "--region", REGION,
         "--train-from", TRAIN[0], "--train-to", TRAIN[1], "--horizon", "14", "--out", p("fit.json")],
        ["report", "--cases", p("cases.csv"), "--sentiment", p("daily_sentiment.csv"), "--region", REGION,
         "--train-from", TRAIN[0], "--train-to", TRAIN[1], "--out", p("report.csv"), "--table-out", p("report.txt")],
        ["explain", "--matches", p("matches.csv"), "--scores", p("scores.csv"), "--fit", p("fit.json"),
         "--from", TRAIN[0], "--to", TRAIN[1], "--out", p("explanations.json"), "--dot", p("triggers.dot")],
    ]


def run_toy_pipeline(out_dir: str | Path, workers: int = 1, seed: int = 7) -> list[Path]:
    """Run every subcommand in order; raises RuntimeError on the first non-zero exit."""
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    for argv in toy_commands(out_dir, workers, seed):
        code = main(argv)
        if code != 0:
            raise RuntimeError(f"{argv[0]} exited with {code}")
    return [Path(out_dir) / name for name in OUTPUTS]


if __name__ == "__main__":
    import sys

    run_toy_pipeline(sys.argv[1] if len(sys.argv) > 1 else "toy_run")
