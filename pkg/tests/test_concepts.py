import math
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tweet
from episense.concepts import (
    ConceptMatch,
    ConceptSet,
    EmbeddingStore,
    MatcherConfig,
    concept_cloud,
    cosine,
    embed_phrase,
    load_concept_set,
    load_embeddings,
    match_concepts,
    match_corpus,
    matches_csv,
    parse_matches_csv,
    phrase_candidates,
    tokenize,
)
from episense.errors import (
    DimensionMismatch,
    DuplicateToken,
    HeaderMismatch,
    InvalidRange,
    UnembeddableConcept,
    ZeroVector,
)


def test_load_embeddings():
    store = load_embeddings("2 3\nfoo 1 0 0\nBar 0 1 0.5\n")
    assert store.dimension == 3
    assert list(store.get("bar")) == [0.0, 1.0, 0.5]
    assert store.get("baz") is None


@pytest.mark.parametrize(
    "text, err",
    [
        ("", HeaderMismatch),
        ("x y\nfoo 1\n", HeaderMismatch),
        ("3 2\nfoo 1 0\n", HeaderMismatch),
        ("1 2\nfoo 1 0 1\n", DimensionMismatch),
        ("2 2\nfoo 1 0\nfoo 0 1\n", DuplicateToken),
    ],
)
def test_embedding_errors(text, err):
    with pytest.raises(err):
        load_embeddings(text)


def test_tokenize():
    assert tokenize("") == []
    assert tokenize("Lockdown extended! #COVID19 @gov http://x.y") == ["lockdown", "extended", "covid19"]
    assert tokenize("The of a") == []
    assert tokenize("RT @health_dept: masks_given 2020 x www.a.b") == ["masks", "given"]


def test_phrase_candidates_order():
    assert phrase_candidates(["a"], 3) == ["a"]
    assert phrase_candidates(["x", "y"], 2) == ["x", "y", "x y"]
    assert phrase_candidates([], 3) == []
    assert phrase_candidates(["x", "y", "x", "y"], 2) == ["x", "y", "x y", "y x"]


def test_embed_phrase(ab_store):
    np.testing.assert_array_equal(embed_phrase(ab_store, "aa"), [1.0, 0.0])
    np.testing.assert_array_equal(embed_phrase(ab_store, "aa bb zz"), [0.5, 0.5])
    assert embed_phrase(ab_store, "zz yy") is None


def test_cosine_examples():
    assert cosine([1, 0], [1, 0]) == 1.0
    assert cosine([1, 0], [0, 1]) == 0.0
    assert cosine([1, 1], [1, 0]) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    with pytest.raises(ZeroVector):
        cosine([0, 0], [1, 0])
    with pytest.raises(DimensionMismatch):
        cosine([1, 0], [1, 0, 0])


def test_exact_match_scores_one(ab_store):
    cs = ConceptSet((("alpha", np.array([1.0, 0.0])),))
    (m,) = match_concepts(tweet("1", "aa"), ab_store, cs)
    assert (m.concept, m.similarity, m.matched_phrase) == ("alpha", 1.0, "aa")


def test_threshold_both_sides(ab_store):
    cs = ConceptSet((("c", np.array([1.0, 1.0]) / math.sqrt(2)),))
    (m,) = match_concepts(tweet("1", "aa"), ab_store, cs)
    assert m.similarity == pytest.approx(0.7071067811865476)
    assert match_concepts(tweet("1", "aa"), ab_store, cs, MatcherConfig(threshold=0.8)) == []


def test_boundary_is_inclusive():
    # 9/20 with both norms exact, so the float quotient rounds to the literal 0.45
    store = EmbeddingStore(5, {"uu": np.array([1.0, 0, 0, 0, 0]), "vv": np.array([9.0, 17, 5, 2, 1])})
    assert cosine(store.get("uu"), store.get("vv")) == 0.45
    cs = ConceptSet((("v", store.get("vv")),))
    (m,) = match_concepts(tweet("1", "uu"), store, cs, MatcherConfig(threshold=0.45))
    assert m.similarity == 0.45


def test_best_phrase_and_ties(ab_store):
    cs = ConceptSet((("ca", np.array([1.0, 0.0])), ("cb", np.array([0.0, 1.0]))))
    ms = match_concepts(tweet("1", "bb aa bb"), ab_store, cs, MatcherConfig(max_ngram=2))
    assert [(m.concept, m.matched_phrase) for m in ms] == [("ca", "aa"), ("cb", "bb")]


def test_whole_tweet_variant(ab_store):
    cs = ConceptSet((("ca", np.array([1.0, 0.0])),))
    (m,) = match_concepts(tweet("1", "aa bb"), ab_store, cs, MatcherConfig(whole_tweet=True))
    assert m.matched_phrase == "aa bb"
    assert m.similarity == pytest.approx(1 / math.sqrt(2))


def test_custom_candidate_generator(ab_store):
    cs = ConceptSet((("ca", np.array([1.0, 0.0])),))
    only_last = lambda toks, n: toks[-1:]
    assert match_concepts(tweet("1", "aa bb"), ab_store, cs, candidates=only_last) == []


def test_local_date_uses_offset(ab_store):
    cs = ConceptSet((("ca", np.array([1.0, 0.0])),))
    (m,) = match_concepts(tweet("1", "aa", "2020-04-20T20:00:00+00:00"), ab_store, cs, utc_offset_minutes=330)
    assert m.local_date == date(2020, 4, 21)


def test_concept_set_file(toy_store):
    cs = load_concept_set("mistrust\n# skipped\nmask distribution\tmasks distributed\n", toy_store)
    assert cs.names == ["mistrust", "mask distribution"]
    np.testing.assert_allclose(cs.concepts[1][1], embed_phrase(toy_store, "masks distributed"))
    with pytest.raises(UnembeddableConcept):
        load_concept_set("zebra crossing\n", toy_store)


def test_toy_concepts_match(toy_store, toy_concepts):
    ms = match_concepts(tweet("1", "Church hospitals open beds for patients"), toy_store, toy_concepts)
    assert "church hospitals" in {m.concept for m in ms}
    assert all(m.similarity >= 0.45 for m in ms)


def test_matches_csv_round_trip():
    ms = [ConceptMatch("t1", "mistrust", 0.5, "mistrust of, government", date(2020, 4, 16))]
    text = matches_csv(ms)
    assert text.splitlines()[1] == 't1,2020-04-16,mistrust,0.500000,"mistrust of, government"'
    assert parse_matches_csv(text) == ms


def _m(concept, day=date(2020, 4, 16), tid="t"):
    return ConceptMatch(tid, concept, 0.9, concept, day)


def test_cloud_examples():
    d0, d1 = date(2020, 4, 16), date(2020, 4, 20)
    assert concept_cloud([], d0, d1, ["x"]).counts == {"x": 0}
    cloud = concept_cloud([_m("mistrust")] * 3 + [_m("rumors")], d0, d1)
    assert cloud.counts == {"mistrust": 3, "rumors": 1}
    assert cloud.ordered()[0] == ("mistrust", 3)
    tie = concept_cloud([_m("b"), _m("a"), _m("b"), _m("a")], d0, d1)
    assert tie.to_csv() == "concept,count\na,2\nb,2\n"
    with pytest.raises(InvalidRange):
        concept_cloud([], d1, d0)


def test_cloud_conservation():
    days = [date(2020, 4, d) for d in range(10, 25)]
    ms = [_m(c, d) for c, d in zip("abcabcabcabcabc", days)]
    cloud = concept_cloud(ms, date(2020, 4, 14), date(2020, 4, 19))
    assert cloud.total() == sum(1 for m in ms if date(2020, 4, 14) <= m.local_date <= date(2020, 4, 19))


vecs = st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: math.sqrt(sum(x * x for x in v)) > 1e-3
)


@given(vecs, vecs, st.floats(1e-3, 1e3))
def test_cosine_symmetry_and_scale(u, v, alpha):
    assert abs(cosine(u, v) - cosine(v, u)) <= 1e-12
    assert abs(cosine([alpha * x for x in u], v) - cosine(u, v)) <= 1e-12
    assert -1.0 <= cosine(u, v) <= 1.0


words = st.sampled_from("lockdown extended mistrust government masks rumors online fear panic buying hope bad".split())


@settings(max_examples=50)
@given(st.lists(words, min_size=1, max_size=10), st.floats(0.3, 0.9), st.floats(0.0, 0.1))
def test_threshold_monotone(toy_store, toy_concepts, ws, lo, step):
    t = tweet("1", " ".join(ws))
    low = set(match_concepts(t, toy_store, toy_concepts, MatcherConfig(threshold=lo)))
    high = set(match_concepts(t, toy_store, toy_concepts, MatcherConfig(threshold=lo + step)))
    assert high <= low


@settings(max_examples=30)
@given(st.lists(words, min_size=1, max_size=10), st.randoms(use_true_random=False))
def test_concept_order_irrelevant(toy_store, toy_concepts, ws, rnd):
    t = tweet("1", " ".join(ws))
    shuffled = list(toy_concepts.concepts)
    rnd.shuffle(shuffled)
    assert match_concepts(t, toy_store, ConceptSet(tuple(shuffled))) == match_concepts(t, toy_store, toy_concepts)


def test_worker_count_does_not_change_output(toy_store, toy_concepts):
    from episense.synth import SynthConfig, generate, generate_tweets

    _, sent = generate(SynthConfig(seed=3))
    tweets = generate_tweets(3, sent, "kerala", per_day=3)
    one = match_corpus(tweets, toy_store, toy_concepts, workers=1)
    four = match_corpus(tweets, toy_store, toy_concepts, workers=4)
    assert one == four
    assert matches_csv(one) == matches_csv(four)
