import json
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from episense.concepts import ConceptCloud, ConceptMatch, concept_cloud
from episense.errors import (
    DuplicateEdge,
    EmptyCloud,
    NoSentimentCoefficient,
    SelfLoop,
    UnknownConcept,
    UnknownEndpoint,
)
from episense.explain import (
    bundled_graph,
    explain_top_concepts,
    explanations_json,
    influence_scores,
    load_graph,
    trigger_dot,
    triggers_of,
)
from episense.regress import FitResult

D0, D1 = date(2020, 4, 16), date(2020, 5, 14)


def graph(nodes, edges):
    return load_graph(json.dumps({"nodes": nodes, "edges": edges}))


def fit_with(beta):
    names = ("cum_new", "cum_recovered", "sentiment")
    coefs = {"intercept": 1.0, "cum_new": 0.1, "cum_recovered": -0.1, "sentiment": beta}
    return FitResult(names, coefs, dict.fromkeys(coefs, 1.0), (), 1.0, 0.5, 0.4, 20, 3, 16, True, 10.0)


def test_load_examples():
    g = graph(["a"], [])
    assert g.nodes == {"a"} and not g.edges
    with pytest.raises(SelfLoop):
        graph(["a"], [["a", "a"]])
    g = graph(["a", "b", "c"], [["a", "b"], ["b", "c"]])
    assert (len(g.nodes), len(g.edges)) == (3, 2)
    with pytest.raises(UnknownEndpoint):
        graph(["a"], [["a", "z"]])
    with pytest.raises(DuplicateEdge):
        graph(["a", "b"], [["a", "b"], ["a", "b"]])


def test_triggers_examples():
    chain = graph(["a", "b", "c"], [["a", "b"], ["b", "c"]])
    assert triggers_of(chain, "a", 5) == []
    assert triggers_of(chain, "c", 5) == [("b", 1), ("a", 2)]
    assert triggers_of(chain, "c", 1) == [("b", 1)]
    cycle = graph(["a", "b"], [["a", "b"], ["b", "a"]])
    assert triggers_of(cycle, "a", 10) == [("b", 1)]
    with pytest.raises(UnknownConcept):
        triggers_of(chain, "zzz", 3)


def test_triggers_sorted_by_depth_then_name():
    g = graph(["r", "q", "p", "x", "t"], [["q", "t"], ["p", "t"], ["x", "q"], ["r", "p"]])
    assert triggers_of(g, "t", 3) == [("p", 1), ("q", 1), ("r", 2), ("x", 2)]


names = st.sampled_from("abcdefgh")


@settings(max_examples=100)
@given(st.lists(st.tuples(names, names), max_size=30), names, st.integers(1, 6))
def test_triggers_properties(raw_edges, concept, depth):
    edges = sorted({(u, v) for u, v in raw_edges if u != v})
    g = graph(list("abcdefgh"), [list(e) for e in edges])
    out = triggers_of(g, concept, depth)
    nodes = [n for n, _ in out]
    assert concept not in nodes
    assert len(set(nodes)) == len(nodes)
    assert all(1 <= d <= depth for _, d in out)
    assert out == sorted(out, key=lambda nd: (nd[1], nd[0]))


def _m(tid, concept, day=D0):
    return ConceptMatch(tid, concept, 0.9, concept, day)


def test_single_concept():
    ms = [_m("t1", "mistrust")]
    cloud = concept_cloud(ms, D0, D1)
    (e,) = explain_top_concepts(cloud, ms, {"t1": -0.5}, fit_with(2.0), bundled_graph(), k=1)
    assert e.concept == "mistrust"
    assert e.influence_score == pytest.approx(1.0)
    assert all(d >= 1 for _, d in e.triggers)


def test_zero_beta_orders_by_name():
    ms = [_m("t1", "b"), _m("t2", "a"), _m("t3", "c"), _m("t4", "b")]
    cloud = concept_cloud(ms, D0, D1)
    out = explain_top_concepts(cloud, ms, dict.fromkeys(["t1", "t2", "t3", "t4"], 0.7), fit_with(0.0), graph(["a"], []), k=3)
    assert [e.concept for e in out] == ["a", "b", "c"]
    assert all(e.influence_score == 0.0 for e in out)
    assert out[1].triggers == ()


def test_count_ratio():
    ms = [_m(f"x{i}", "x") for i in range(3)] + [_m("y0", "y")]
    scores = {m.tweet_id: 0.4 for m in ms}
    inf = influence_scores(concept_cloud(ms, D0, D1), ms, scores, fit_with(1.5))
    assert inf["x"] == pytest.approx(3 * inf["y"], rel=1e-15)


def test_errors():
    ms = [_m("t1", "a")]
    cloud = concept_cloud(ms, D0, D1)
    no_sent = FitResult(("cum_new",), {"cum_new": 1.0}, {"cum_new": 1.0}, (), 1, 0.5, 0.4, 10, 1, 8, False, 1.0)
    with pytest.raises(NoSentimentCoefficient):
        explain_top_concepts(cloud, ms, {"t1": 1.0}, no_sent, graph(["a"], []))
    with pytest.raises(EmptyCloud):
        explain_top_concepts(concept_cloud([], D0, D1, ["a"]), [], {}, fit_with(1.0), graph(["a"], []))


@settings(max_examples=50)
@given(
    st.lists(st.tuples(st.integers(0, 15), st.sampled_from("pqrs")), min_size=1, max_size=30),
    st.floats(0.05, 20),
    st.randoms(use_true_random=False),
)
def test_scaling_and_permutation(rows, alpha, rnd):
    ms = [_m(f"t{i}", c) for i, c in rows]
    base = {f"t{i}": ((i * 37) % 19 - 9) / 10 for i in range(16)}
    cloud = concept_cloud(ms, D0, D1)
    g = graph(list("pqrs"), [])
    fit = fit_with(1.3)
    ref = influence_scores(cloud, ms, base, fit)
    shuffled = list(ms)
    rnd.shuffle(shuffled)
    assert influence_scores(cloud, shuffled, base, fit) == pytest.approx(ref, rel=1e-12)
    scaled = {k: v * alpha / 20 for k, v in base.items()}
    base_small = {k: v / 20 for k, v in base.items()}
    small = influence_scores(cloud, ms, base_small, fit)
    big = influence_scores(cloud, ms, scaled, fit)
    for c in small:
        assert big[c] == pytest.approx(alpha * small[c], rel=1e-12, abs=1e-300)
    top = [e.concept for e in explain_top_concepts(cloud, ms, base_small, fit, g, k=4)]
    top_scaled = [e.concept for e in explain_top_concepts(cloud, ms, scaled, fit, g, k=4)]
    distinct = len(set(round(v, 12) for v in small.values())) == len(small)
    if distinct:
        assert top == top_scaled


def test_bundled_graph_has_concepts_and_cycle():
    g = bundled_graph()
    for name in ("mistrust", "church hospitals", "mask distribution", "mental health"):
        assert name in g.nodes
    assert triggers_of(g, "epidemic outbreak", 10)


def test_outputs():
    ms = [_m("t1", "mistrust"), _m("t2", "rumors")]
    cloud = concept_cloud(ms, D0, D1)
    g = bundled_graph()
    ex = explain_top_concepts(cloud, ms, {"t1": -0.8, "t2": 0.2}, fit_with(1.0), g, k=2)
    doc = json.loads(explanations_json(ex))
    assert [d["concept"] for d in doc] == ["mistrust", "rumors"]
    for e in ex:
        for path in e.paths_sampled:
            assert path[-1] == e.concept
            assert all((u, v) in g.edges for u, v in zip(path, path[1:]))
    dot = trigger_dot(g, ex)
    assert dot.startswith("digraph triggers {") and '"mistrust" [shape=box];' in dot
