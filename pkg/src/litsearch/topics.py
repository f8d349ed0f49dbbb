"""Topic parsing and keyword query construction.

Topics carry three fields: a terse ``query``, a natural-language
``question``, and a longer ``narrative``. Keyword queries are built from the
query field (stopwords removed), optionally expanded with rare terms
harvested from the question field. Rarity is judged by idf against a target
index: a term is kept when idf >= theta. The default theta of ln(10) keeps
terms occurring in roughly fewer than 10% of units.

Narratives are parsed but never used for query construction.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from importlib import resources

from .errors import ParseError
from .index import InvertedIndex, tokenize

DEFAULT_THETA = math.log(10.0)


def _load_stopwords() -> frozenset[str]:
    text = resources.files("litsearch.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(line for line in text.splitlines() if line and not line.startswith("#"))


STOPWORDS = _load_stopwords()


@dataclass(frozen=True)
class Topic:
    topic_id: int
    query: str
    question: str = ""
    narrative: str = ""


@dataclass(frozen=True)
class QueryRepresentation:
    topic_id: int
    terms: tuple[str, ...]
    provenance: tuple[str, ...]  # "query_field" | "question_expansion", parallel to terms


def _check_topics(topics: list[Topic]) -> list[Topic]:
    seen: set[int] = set()
    for t in topics:
        if t.topic_id in seen:
            raise ParseError(f"duplicate topic id {t.topic_id}")
        seen.add(t.topic_id)
        if not t.query.strip():
            raise ParseError(f"topic {t.topic_id} missing query field")
    return topics


def _parse_topics_jsonl(content: str) -> list[Topic]:
    topics = []
    for i, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed topic record: {exc.msg}", i) from exc
        if "number" not in obj:
            raise ParseError("topic record missing 'number'", i)
        topics.append(
            Topic(
                topic_id=int(obj["number"]),
                query=str(obj.get("query") or ""),
                question=str(obj.get("question") or ""),
                narrative=str(obj.get("narrative") or ""),
            )
        )
    return topics


def _parse_topics_xml(content: str) -> list[Topic]:
    try:
        root = ET.fromstring(content)
    except ET.ParseError:
        try:
            root = ET.fromstring(f"<topics>{content}</topics>")
        except ET.ParseError as exc:
            raise ParseError(f"malformed topics XML: {exc}") from exc
    topics = []
    for node in root.iter("topic"):
        number = node.get("number")
        if number is None:
            raise ParseError("topic element missing 'number' attribute")

        def text_of(tag: str) -> str:
            child = node.find(tag)
            return (child.text or "").strip() if child is not None else ""

        topics.append(
            Topic(
                topic_id=int(number),
                query=text_of("query"),
                question=text_of("question"),
                narrative=text_of("narrative"),
            )
        )
    return topics


def parse_topics(path) -> list[Topic]:
    """Parse a topic file, accepting both JSONL and TREC-style XML."""
    with open(path, encoding="utf-8") as fh:
        content = fh.read()
    stripped = content.lstrip()
    if stripped.startswith("<"):
        return _check_topics(_parse_topics_xml(content))
    return _check_topics(_parse_topics_jsonl(content))


def strip_stopwords(terms: list[str]) -> list[str]:
    """Order-preserving removal of stopword tokens."""
    return [t for t in terms if t not in STOPWORDS]


def extract_key_terms(question: str, idf_source: InvertedIndex, theta: float) -> list[str]:
    """Rare non-stopword tokens of the question field, idf >= theta.

    Out-of-vocabulary tokens have maximal idf, so they are kept for any
    finite theta. Order-preserving and deduplicated.
    """
    kept: list[str] = []
    seen: set[str] = set()
    for token in strip_stopwords(tokenize(question)):
        if token in seen:
            continue
        seen.add(token)
        if idf_source.idf(token) >= theta:
            kept.append(token)
    return kept


def generate_query(
    t: Topic, idx: InvertedIndex, theta: float = DEFAULT_THETA, extractor=None
) -> QueryRepresentation:
    """Build the keyword query representation for a topic.

    Query-field tokens (stopwords removed, deduplicated) come first, then
    question-field expansion terms not already present. With theta = +inf
    the expansion is empty and the result is the plain query-field
    representation. When ``extractor`` is given (any object with an
    ``extract(text) -> list[str]`` method, e.g. an external entity
    extractor), its terms replace the idf-threshold heuristic.
    """
    terms: list[str] = []
    provenance: list[str] = []
    for token in strip_stopwords(tokenize(t.query)):
        if token not in terms:
            terms.append(token)
            provenance.append("query_field")
    if extractor is not None:
        expansion: list[str] = []
        for phrase in extractor.extract(t.question):
            expansion.extend(strip_stopwords(tokenize(phrase)))
    else:
        expansion = extract_key_terms(t.question, idx, theta)
    for token in expansion:
        if token not in terms:
            terms.append(token)
            provenance.append("question_expansion")
    return QueryRepresentation(t.topic_id, tuple(terms), tuple(provenance))
