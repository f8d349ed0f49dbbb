import pytest

from litsearch.corpus import generate_all_units, load_corpus
from litsearch.feedback import parse_qrels
from litsearch.index import build_index
from litsearch.topics import parse_topics

from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden"


@pytest.fixture(scope="session")
def articles():
    return load_corpus(FIXTURES / "corpus.jsonl")


@pytest.fixture(scope="session")
def indexes(articles):
    return {
        g: build_index(generate_all_units(articles.values(), g), g)
        for g in ("abstract", "fulltext", "paragraph")
    }


@pytest.fixture(scope="session")
def topics():
    return parse_topics(FIXTURES / "topics.jsonl")


@pytest.fixture(scope="session")
def qrels():
    return parse_qrels(FIXTURES / "qrels.txt")


@pytest.fixture(scope="session")
def heldout_qrels():
    return parse_qrels(FIXTURES / "qrels_heldout.txt")
