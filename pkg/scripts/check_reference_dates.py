#!/usr/bin/env python3
"""Check the divergence dates of the two reference region pairs on real case data.

Usage: check_reference_dates.py DATA_DIR

DATA_DIR must hold kerala.csv, madrid.csv, maharashtra.csv and cataluna.csv in
the episense case format (date,new_cases,recovered,deaths), covering
2020-03-15..2020-06-01. Converting the public Indian and Spanish datasets into
that format is left to the user. Each pair runs through ``episense diverge``
with the flags listed in PAIRS; Kerala is scaled by 100, everything else uses
the detector defaults. Exits 0 when both dates match.
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from episense.cli import main as episense

PAIRS = (
    ("kerala", "madrid", ["--scale-a", "100"], "2020-05-01"),
    ("maharashtra", "cataluna", [], "2020-04-22"),
)
SPAN = ["--from", "2020-03-15", "--to", "2020-06-01"]
FILES = tuple(f"{name}.csv" for a, b, _, _ in PAIRS for name in (a, b))


def data_present(data_dir: str | Path) -> bool:
    return all((Path(data_dir) / f).is_file() for f in FILES)


def check(data_dir: str | Path) -> list[tuple[str, str | None, str]]:
    """Return (pair, detected date, expected date) for each reference pair."""
    d = Path(data_dir)
    results = []
    with tempfile.TemporaryDirectory() as tmp:
        for a, b, flags, expected in PAIRS:
            out = Path(tmp) / f"{a}_{b}.json"
            argv = ["diverge", "--a", str(d / f"{a}.csv"), "--b", str(d / f"{b}.csv"),
                    "--label-a", a, "--label-b", b, *flags, *SPAN, "--out", str(out)]
            code = episense(argv)
            got = json.loads(out.read_text())["divergence_date"] if code == 0 else None
            results.append((f"{a}/{b}", got, expected))
    return results


def run(argv: list[str]) -> int:
    if len(argv) != 1:
        print(__doc__, file=sys.stderr)
        return 3
    if not data_present(argv[0]):
        print(f"missing one of {', '.join(FILES)} in {argv[0]}", file=sys.stderr)
        return 2
    ok = True
    for pair, got, expected in check(argv[0]):
        status = "PASS" if got == expected else "FAIL"
        ok &= got == expected
        print(f"{status} {pair}: detected {got}, expected {expected}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
