"""Causal sub-event graph and trigger explanations for influential concepts."""

from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

from episense.concepts import ConceptCloud, ConceptMatch
from episense.errors import (
    DataError,
    DuplicateEdge,
    EmptyCloud,
    MissingScore,
    NoSentimentCoefficient,
    SelfLoop,
    UnknownConcept,
    UnknownEndpoint,
)
from episense.regress import SENTIMENT, FitResult

BUNDLED_GRAPH = "helbing_sars.json"


@dataclass(frozen=True)
class CausalGraph:
    """Directed graph of sub-events; an edge ``(u, v)`` reads "u triggers v"."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    labels: Mapping[tuple[str, str], str] = field(default_factory=dict)

    def parents(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = defaultdict(list)
        for u, v in self.edges:
            out[v].append(u)
        return out


def load_graph(text: str) -> CausalGraph:
    """Parse ``{"nodes": [...], "edges": [[from, to], ...]}``.

    Edges may carry a third element used as the edge label.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"graph is not valid JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise DataError("graph JSON needs 'nodes' and 'edges'")
    nodes = [str(n) for n in doc["nodes"]]
    if len(set(nodes)) != len(nodes):
        raise DataError("duplicate node names")
    node_set = frozenset(nodes)
    edges: set[tuple[str, str]] = set()
    labels: dict[tuple[str, str], str] = {}
    for raw in doc["edges"]:
        if not isinstance(raw, (list, tuple)) or len(raw) not in (2, 3):
            raise DataError(f"bad edge {raw!r}")
        u, v = str(raw[0]), str(raw[1])
        if u not in node_set or v not in node_set:
            raise UnknownEndpoint((u, v))
        if u == v:
            raise SelfLoop(u)
        if (u, v) in edges:
            raise DuplicateEdge((u, v))
        edges.add((u, v))
        if len(raw) == 3:
            labels[(u, v)] = str(raw[2])
    return CausalGraph(node_set, frozenset(edges), labels)


def bundled_graph() -> CausalGraph:
    return load_graph(resources.files("episense.data").joinpath(BUNDLED_GRAPH).read_text(encoding="utf-8"))


def triggers_of(g: CausalGraph, concept: str, max_depth: int) -> list[tuple[str, int]]:
    """Ancestors of ``concept`` within ``max_depth`` hops, ordered by (depth, name)."""
    if concept not in g.nodes:
        raise UnknownConcept(concept)
    parents = g.parents()
    seen = {concept}
    found: list[tuple[str, int]] = []
    frontier = deque([(concept, 0)])
    while frontier:
        node, depth = frontier.popleft()
        if depth == max_depth:
            continue
        for parent in sorted(parents.get(node, ())):
            if parent not in seen:
                seen.add(parent)
                found.append((parent, depth + 1))
                frontier.append((parent, depth + 1))
    return sorted(found, key=lambda nd: (nd[1], nd[0]))


def trigger_paths(g: CausalGraph, concept: str, triggers: Sequence[tuple[str, int]]) -> list[list[str]]:
    """One shortest trigger-to-concept path per trigger (lexicographically first)."""
    parents = g.parents()
    # BFS back from the concept, recording the next hop toward it
    toward: dict[str, str] = {}
    seen = {concept}
    frontier = deque([concept])
    while frontier:
        node = frontier.popleft()
        for parent in sorted(parents.get(node, ())):
            if parent not in seen:
                seen.add(parent)
                toward[parent] = node
                frontier.append(parent)
    paths = []
    for trigger, _ in triggers:
        path = [trigger]
        while path[-1] != concept:
            path.append(toward[path[-1]])
        paths.append(path)
    return paths


@dataclass(frozen=True)
class Explanation:
    concept: str
    influence_score: float
    triggers: tuple[tuple[str, int], ...]
    paths_sampled: tuple[tuple[str, ...], ...]

    def to_dict(self) -> dict:
        return {
            "concept": self.concept,
            "influence_score": self.influence_score,
            "triggers": [{"node": n, "depth": d} for n, d in self.triggers],
            "paths": [list(p) for p in self.paths_sampled],
        }


def influence_scores(
    cloud: ConceptCloud,
    matches: Iterable[ConceptMatch],
    scores: Mapping[str, float],
    fit: FitResult,
) -> dict[str, float]:
    """share(c) * |sentiment coefficient| * mean |score| over c's in-period matches."""
    if SENTIMENT not in fit.coefficients:
        raise NoSentimentCoefficient()
    total = cloud.total()
    if total == 0:
        raise EmptyCloud()
    lo, hi = cloud.period
    magnitudes: dict[str, list[float]] = defaultdict(list)
    for m in matches:
        if not lo <= m.local_date <= hi:
            continue
        if m.tweet_id not in scores:
            raise MissingScore(m.tweet_id)
        magnitudes[m.concept].append(abs(scores[m.tweet_id]))
    beta = abs(fit.coefficients[SENTIMENT])
    out = {}
    for name, count in cloud.counts.items():
        if count == 0:
            continue
        mags = magnitudes.get(name, ())
        mean_mag = math.fsum(mags) / len(mags) if mags else 0.0
        out[name] = (count / total) * beta * mean_mag
    return out


def explain_top_concepts(
    cloud: ConceptCloud,
    matches: Sequence[ConceptMatch],
    scores: Mapping[str, float],
    fit: FitResult,
    g: CausalGraph,
    k: int = 5,
    max_depth: int = 3,
) -> list[Explanation]:
    """Rank concepts by influence and attach their causal triggers.

    Ties in influence are broken by concept name. Concepts absent from the
    graph are still ranked but carry no triggers.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    influence = influence_scores(cloud, matches, scores, fit)
    ranked = sorted(influence.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    out = []
    for name, score in ranked:
        if name in g.nodes:
            trig = triggers_of(g, name, max_depth)
            paths = trigger_paths(g, name, trig)
        else:
            trig, paths = [], []
        out.append(Explanation(name, score, tuple(trig), tuple(tuple(p) for p in paths)))
    return out


def explanations_json(explanations: Sequence[Explanation]) -> str:
    return json.dumps([e.to_dict() for e in explanations], indent=2, sort_keys=False) + "\n"


def trigger_dot(g: CausalGraph, explanations: Sequence[Explanation]) -> str:
    """Graphviz description of the subgraph spanned by the explanations' paths."""
    nodes: set[str] = set()
    edges: set[tuple[str, str]] = set()
    for e in explanations:
        nodes.add(e.concept)
        for path in e.paths_sampled:
            nodes.update(path)
            edges.update(zip(path, path[1:]))
    focus = {e.concept for e in explanations}
    lines = ["digraph triggers {", "  rankdir=LR;"]
    for n in sorted(nodes):
        shape = "box" if n in focus else "ellipse"
        lines.append(f'  "{n}" [shape={shape}];')
    for u, v in sorted(edges):
        label = g.labels.get((u, v))
        attr = f' [label="{label}"]' if label else ""
        lines.append(f'  "{u}" -> "{v}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"
