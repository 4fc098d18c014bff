from datetime import date, datetime, timezone
from importlib import resources

import numpy as np
import pytest

from episense.concepts import EmbeddingStore, load_concept_set, load_embeddings
from episense.corpus import TweetRecord


def tweet(id_, text, ts="2020-04-20T06:00:00+00:00", region="kerala"):
    return TweetRecord(id_, datetime.fromisoformat(ts).astimezone(timezone.utc), region, text)


@pytest.fixture(scope="session")
def toy_store():
    text = resources.files("episense.data").joinpath("toy_embeddings.txt").read_text()
    return load_embeddings(text)


@pytest.fixture(scope="session")
def toy_concepts(toy_store):
    text = resources.files("episense.data").joinpath("concepts.tsv").read_text()
    return load_concept_set(text, toy_store)


@pytest.fixture(scope="session")
def ab_store():
    return EmbeddingStore(2, {"aa": np.array([1.0, 0.0]), "bb": np.array([0.0, 1.0])})


D = date


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
