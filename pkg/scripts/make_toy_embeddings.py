#!/usr/bin/env python3
"""Regenerate src/episense/data/toy_embeddings.txt.

Each token gets a unit weight on its topic axis plus small deterministic
perturbations on every axis, so tokens cluster by topic. Polar sentiment
words live on their own axis and match no concept.
"""

from pathlib import Path

from episense.synth import SplitMix64

TOPICS = {
    "policy": "lockdown extended again overextension sealed containment zones",
    "economy": "jobs unemployment rising daily wage workers lost work",
    "mind": "mental health anxiety people need therapy",
    "hospital": "hospitals overloaded beds church open medical care shortage doctors",
    "masks": "masks mask distributed distribution drive today",
    "rumor": "rumors spreading online fake news",
    "trust": "mistrust distrust trust lose government authorities",
    "gathering": "wedding gathering crowd religious",
    "unrest": "social unrest instability",
    "panic": "panic buying fear",
    "spread": "virus transmission infection",
    "travel": "tourism collapsed",
    "affect": "good hope safe grateful recovering great bad terrible worried sad angry awful",
    "other": "covid19",
}
AXES = list(TOPICS) + ["n1", "n2"]
OUT = Path(__file__).resolve().parent.parent / "src" / "episense" / "data" / "toy_embeddings.txt"


def main() -> None:
    rng = SplitMix64(20200501)
    rows = []
    seen = set()
    for topic, words in TOPICS.items():
        axis = AXES.index(topic)
        for word in words.split():
            if word in seen:
                continue
            seen.add(word)
            vec = [round(rng.uniform_range(-0.08, 0.08), 4) for _ in AXES]
            vec[axis] = 1.0
            rows.append(word + " " + " ".join(f"{v:.4f}" for v in vec))
    OUT.write_text(f"{len(rows)} {len(AXES)}\n" + "\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {len(rows)} tokens to {OUT}")


if __name__ == "__main__":
    main()
