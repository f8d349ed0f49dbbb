"""Article ingestion and derivation of retrieval units.

The corpus file is UTF-8 JSON lines, one article per line. Required fields
are ``id`` and ``title``; everything else is optional and unknown fields are
ignored (the upstream corpus schema drifts between releases).

An article is turned into indexable "retrieval units" under one of three
granularities:

* ``abstract``  - one unit: title + abstract
* ``fulltext``  - one unit: title + abstract + every body paragraph
* ``paragraph`` - n+1 units for an article with n paragraphs: a title+abstract
  unit, plus one title+abstract+paragraph unit per paragraph
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Iterator

from .errors import ParseError, RejectionError

GRANULARITIES = ("abstract", "fulltext", "paragraph")


@dataclass(frozen=True)
class Article:
    article_id: str
    title: str
    abstract: str = ""
    paragraphs: tuple[str, ...] = ()
    authors: tuple[str, ...] = ()
    journal: str = ""
    source: str = ""
    publish_time: str = ""
    url: str = ""


@dataclass(frozen=True)
class RetrievalUnit:
    """One indexable document derived from an article.

    ``unit_id`` equals the article id except for body-paragraph units, which
    use ``<article_id>.<paragraph_index>``.
    """

    unit_id: str
    article_id: str
    granularity: str
    text: str
    paragraph_index: int | None = None


def parse_article(record: str, line_number: int | None = None) -> Article:
    """Parse one corpus line into an Article.

    Raises ParseError on malformed JSON and RejectionError when ``id`` or
    ``title`` is missing or empty. Unknown fields are ignored.
    """
    try:
        obj = json.loads(record)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed corpus record: {exc.msg}", line_number) from exc
    if not isinstance(obj, dict):
        raise ParseError("corpus record is not an object", line_number)

    article_id = str(obj.get("id") or "").strip()
    if not article_id:
        raise RejectionError("record missing required field 'id'", line_number)
    title = str(obj.get("title") or "").strip()
    if not title:
        raise RejectionError(f"record {article_id!r} missing required field 'title'", line_number)

    paragraphs = tuple(str(p) for p in obj.get("paragraphs") or [])
    authors = tuple(str(a) for a in obj.get("authors") or [])
    return Article(
        article_id=article_id,
        title=title,
        abstract=str(obj.get("abstract") or ""),
        paragraphs=paragraphs,
        authors=authors,
        journal=str(obj.get("journal") or ""),
        source=str(obj.get("source") or ""),
        publish_time=str(obj.get("publish_time") or ""),
        url=str(obj.get("url") or ""),
    )


def serialize_article(a: Article) -> str:
    """Inverse of parse_article for the retained fields."""
    return json.dumps(
        {
            "id": a.article_id,
            "title": a.title,
            "abstract": a.abstract,
            "paragraphs": list(a.paragraphs),
            "authors": list(a.authors),
            "journal": a.journal,
            "source": a.source,
            "publish_time": a.publish_time,
            "url": a.url,
        },
        ensure_ascii=False,
    )


def load_corpus(path) -> dict[str, Article]:
    """Read a JSONL corpus file into an id -> Article map.

    Duplicate article ids raise RejectionError (ids must be unique within a
    corpus). Blank lines are skipped.
    """
    articles: dict[str, Article] = {}
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            article = parse_article(line, line_number=i)
            if article.article_id in articles:
                raise RejectionError(f"duplicate article id {article.article_id!r}", line_number=i)
            articles[article.article_id] = article
    return articles


def _join(parts: Iterable[str]) -> str:
    return " ".join(p for p in parts if p)


def generate_units(a: Article, granularity: str) -> list[RetrievalUnit]:
    """Derive the retrieval units of one article for a given granularity.

    Empty abstracts are tolerated: the title alone is still indexed. At
    paragraph granularity the title+abstract unit is emitted even when the
    abstract is empty, so an article with n paragraphs always yields n+1
    units.
    """
    if granularity not in GRANULARITIES:
        raise ValueError(f"unknown granularity {granularity!r}")
    if granularity == "abstract":
        return [RetrievalUnit(a.article_id, a.article_id, granularity, _join([a.title, a.abstract]))]
    if granularity == "fulltext":
        text = _join([a.title, a.abstract, *a.paragraphs])
        return [RetrievalUnit(a.article_id, a.article_id, granularity, text)]
    units = [RetrievalUnit(a.article_id, a.article_id, granularity, _join([a.title, a.abstract]))]
    for i, paragraph in enumerate(a.paragraphs):
        units.append(
            RetrievalUnit(
                unit_id=f"{a.article_id}.{i}",
                article_id=a.article_id,
                granularity=granularity,
                text=_join([a.title, a.abstract, paragraph]),
                paragraph_index=i,
            )
        )
    return units


def generate_all_units(articles: Iterable[Article], granularity: str) -> Iterator[RetrievalUnit]:
    for a in articles:
        yield from generate_units(a, granularity)


def _load_abbreviations() -> tuple[str, ...]:
    text = resources.files("litsearch.data").joinpath("abbreviations.txt").read_text("utf-8")
    return tuple(line for line in text.splitlines() if line and not line.startswith("#"))


ABBREVIATIONS = _load_abbreviations()

# A split candidate is terminal punctuation followed by whitespace and an
# uppercase letter or digit.
_SPLIT_RE = re.compile(r"[.!?](?=\s+[A-Z0-9])")


def split_sentences(text: str) -> list[str]:
    """Split text into sentences with a rule-based splitter.

    Splits after ".", "!" or "?" followed by whitespace and an uppercase
    letter or digit, unless the text up to the punctuation ends with a
    guarded abbreviation (ABBREVIATIONS). Whitespace is collapsed; joining
    the result with single spaces reproduces the whitespace-collapsed input.
    """
    if not text.strip():
        return []
    sentences = []
    start = 0
    for match in _SPLIT_RE.finditer(text):
        end = match.end()
        prefix = text[:end]
        if any(prefix.endswith(abbr) for abbr in ABBREVIATIONS):
            continue
        piece = " ".join(text[start:end].split())
        if piece:
            sentences.append(piece)
        start = end
    tail = " ".join(text[start:].split())
    if tail:
        sentences.append(tail)
    return sentences
