"""Inverted index construction and BM25 ranked retrieval.

Tokenization is lowercase alphanumeric runs, no stemming and no index-time
stopword removal, so indexed text round-trips deterministically. BM25 uses
k1=0.9, b=0.4 and the non-negative idf variant ln(1 + (N - df + 0.5) /
(df + 0.5)).

The index is immutable after build and fully in-memory; ``save_index`` /
``load_index`` snapshot it to a versioned JSONL file (magic header line,
then one record per unit and per posting list).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import GRANULARITIES, RetrievalUnit
from .errors import IndexingError, ParseError
from .ranking import RankedList

K1 = 0.9
B = 0.4

SNAPSHOT_MAGIC = "litsearch-index"
SNAPSHOT_VERSION = 1

# Unicode alphanumeric runs (word characters minus underscore).
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class InvertedIndex:
    granularity: str
    n_units: int = 0
    avg_dl: float = 0.0
    postings: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    doc_lengths: dict[str, int] = field(default_factory=dict)
    unit_meta: dict[str, tuple[str, str]] = field(default_factory=dict)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        """Non-negative idf: ln(1 + (N - df + 0.5) / (df + 0.5))."""
        df = self.df(term)
        return math.log(1.0 + (self.n_units - df + 0.5) / (df + 0.5))

    def idf_table(self) -> dict[str, float]:
        return {term: self.idf(term) for term in self.postings}

    def __contains__(self, unit_id: str) -> bool:
        return unit_id in self.doc_lengths


def build_index(units: Iterable[RetrievalUnit], granularity: str | None = None) -> InvertedIndex:
    """Build an inverted index over retrieval units.

    Duplicate unit ids raise IndexingError naming the offending id.
    """
    units = list(units)
    if granularity is None:
        granularity = units[0].granularity if units else "abstract"
    idx = InvertedIndex(granularity=granularity)
    term_postings: dict[str, dict[str, int]] = {}
    for unit in units:
        if unit.unit_id in idx.doc_lengths:
            raise IndexingError(f"duplicate unit id {unit.unit_id!r}")
        tokens = tokenize(unit.text)
        idx.doc_lengths[unit.unit_id] = len(tokens)
        idx.unit_meta[unit.unit_id] = (unit.article_id, unit.text)
        for token in tokens:
            term_postings.setdefault(token, {})
            term_postings[token][unit.unit_id] = term_postings[token].get(unit.unit_id, 0) + 1
    idx.n_units = len(idx.doc_lengths)
    idx.avg_dl = sum(idx.doc_lengths.values()) / idx.n_units if idx.n_units else 0.0
    idx.postings = {
        term: sorted(by_unit.items()) for term, by_unit in sorted(term_postings.items())
    }
    return idx


def bm25_score(idx: InvertedIndex, query_tokens: Sequence[str], unit_id: str) -> float:
    """BM25 score of one unit for a token sequence.

    Each occurrence of a term in the query contributes once; terms absent
    from the unit contribute zero.
    """
    if unit_id not in idx.doc_lengths:
        raise IndexingError(f"unknown unit id {unit_id!r}")
    dl = idx.doc_lengths[unit_id]
    norm = K1 * (1.0 - B + B * dl / idx.avg_dl) if idx.avg_dl else K1
    score = 0.0
    for token in query_tokens:
        tf = 0
        for uid, freq in idx.postings.get(token, ()):
            if uid == unit_id:
                tf = freq
                break
        if tf == 0:
            continue
        score += idx.idf(token) * tf * (K1 + 1.0) / (tf + norm)
    return score


def search_tokens(
    idx: InvertedIndex, query_tokens: Sequence[str], k: int, topic_id: int = 0, tag: str = "bm25"
) -> RankedList:
    """Top-k units by BM25 over a token sequence.

    Ties break by ascending unit id; zero-score units are excluded. Score
    accumulation visits query tokens in order, so results are bitwise
    reproducible and match ``bm25_score`` exactly.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores: dict[str, float] = {}
    norms: dict[str, float] = {}
    for token in query_tokens:
        postings = idx.postings.get(token)
        if not postings:
            continue
        idf = idx.idf(token)
        for unit_id, tf in postings:
            norm = norms.get(unit_id)
            if norm is None:
                dl = idx.doc_lengths[unit_id]
                norm = K1 * (1.0 - B + B * dl / idx.avg_dl) if idx.avg_dl else K1
                norms[unit_id] = norm
            scores[unit_id] = scores.get(unit_id, 0.0) + idf * tf * (K1 + 1.0) / (tf + norm)
    hits = [(uid, s) for uid, s in scores.items() if s > 0.0]
    hits.sort(key=lambda pair: (-pair[1], pair[0]))
    return RankedList.from_scored(topic_id, hits[:k], tag)


def search(idx: InvertedIndex, query: str, k: int, topic_id: int = 0, tag: str = "bm25") -> RankedList:
    """Tokenize a query and run a top-k BM25 search."""
    return search_tokens(idx, tokenize(query), k, topic_id=topic_id, tag=tag)


def save_index(idx: InvertedIndex, path) -> None:
    """Write a snapshot: header line, unit records, posting records."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "magic": SNAPSHOT_MAGIC,
            "version": SNAPSHOT_VERSION,
            "granularity": idx.granularity,
            "n_units": idx.n_units,
        }
        fh.write(json.dumps(header) + "\n")
        for unit_id, (article_id, text) in idx.unit_meta.items():
            record = {"u": [unit_id, article_id, idx.doc_lengths[unit_id], text]}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        for term, postings in idx.postings.items():
            fh.write(json.dumps({"t": term, "p": [[u, f] for u, f in postings]}, ensure_ascii=False) + "\n")


def load_index(path) -> InvertedIndex:
    """Read a snapshot written by save_index. Round-trips exactly."""
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ParseError("index snapshot has no valid header", 1) from exc
        if header.get("magic") != SNAPSHOT_MAGIC:
            raise ParseError("not an index snapshot (bad magic)", 1)
        if header.get("version") != SNAPSHOT_VERSION:
            raise ParseError(f"unsupported snapshot version {header.get('version')!r}", 1)
        if header.get("granularity") not in GRANULARITIES:
            raise ParseError(f"unknown granularity {header.get('granularity')!r}", 1)
        idx = InvertedIndex(granularity=header["granularity"])
        for i, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError("malformed snapshot record", i) from exc
            if "u" in record:
                unit_id, article_id, length, text = record["u"]
                idx.doc_lengths[unit_id] = int(length)
                idx.unit_meta[unit_id] = (article_id, text)
            elif "t" in record:
                idx.postings[record["t"]] = [(u, int(f)) for u, f in record["p"]]
            else:
                raise ParseError("unknown snapshot record type", i)
    idx.n_units = len(idx.doc_lengths)
    if idx.n_units != header["n_units"]:
        raise ParseError(f"snapshot truncated: expected {header['n_units']} units, found {idx.n_units}")
    idx.avg_dl = sum(idx.doc_lengths.values()) / idx.n_units if idx.n_units else 0.0
    return idx
