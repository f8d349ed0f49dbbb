"""Reciprocal rank fusion and paragraph-to-article aggregation.

Fusion combines rankings from the abstract, full-text, and paragraph indexes
into a single article-level ranking. Two query treatments exist: ``fusion1``
uses the raw query field (stopwords removed) and ``fusion2`` additionally
expands the query from the question field.
"""

from __future__ import annotations

from .errors import FusionError
from .index import InvertedIndex, search_tokens, tokenize
from .ranking import RankedList
from .topics import DEFAULT_THETA, Topic, generate_query, strip_stopwords

DEFAULT_K_RRF = 60.0
DEFAULT_DEPTH = 1000

FUSION_VARIANTS = ("fusion1", "fusion2")


def split_unit_id(unit_id: str) -> tuple[str, int | None]:
    """Split a unit id into (article_id, paragraph_index).

    Bare article ids map to (id, None); ``a1.3`` maps to ("a1", 3). Raises
    FusionError for ids that are empty or have an empty article part.
    """
    if not unit_id:
        raise FusionError("empty unit id")
    head, sep, tail = unit_id.rpartition(".")
    if sep and tail.isdigit():
        if not head:
            raise FusionError(f"malformed unit id {unit_id!r}")
        return head, int(tail)
    if unit_id.endswith("."):
        raise FusionError(f"malformed unit id {unit_id!r}")
    return unit_id, None


def max_aggregate(paragraph_list: RankedList) -> RankedList:
    """Collapse paragraph units to articles, keeping each article's best score.

    Output is re-ranked by score descending, ties by ascending article id.
    """
    best: dict[str, float] = {}
    for entry in paragraph_list.entries:
        article_id, _ = split_unit_id(entry.doc_id)
        if article_id not in best or entry.score > best[article_id]:
            best[article_id] = entry.score
    ordered = sorted(best.items(), key=lambda pair: (-pair[1], pair[0]))
    return RankedList.from_scored(paragraph_list.topic_id, ordered, paragraph_list.tag)


def rrf(lists: list[RankedList], k_rrf: float = DEFAULT_K_RRF, depth: int = DEFAULT_DEPTH) -> RankedList:
    """Reciprocal rank fusion: score(d) = sum over lists of 1/(k_rrf + rank).

    Only entries within ``depth`` of each input contribute, and the output is
    truncated to ``depth``. Per-document contributions are summed in sorted
    rank order, which makes the result exactly invariant to the order the
    input lists are given in.
    """
    if k_rrf <= 0:
        raise FusionError("k_rrf must be positive")
    if not lists:
        raise FusionError("rrf needs at least one input list")
    topic_id = lists[0].topic_id
    for lst in lists:
        if lst.topic_id != topic_id:
            raise FusionError(f"mismatched topic ids: {lst.topic_id} != {topic_id}")
    ranks: dict[str, list[int]] = {}
    for lst in lists:
        for entry in lst.entries:
            if entry.rank > depth:
                break
            ranks.setdefault(entry.doc_id, []).append(entry.rank)
    scores = {
        doc_id: sum(1.0 / (k_rrf + r) for r in sorted(doc_ranks))
        for doc_id, doc_ranks in ranks.items()
    }
    ordered = sorted(scores.items(), key=lambda pair: (-pair[1], pair[0]))[:depth]
    tag = lists[0].tag
    return RankedList.from_scored(topic_id, ordered, tag)


def fusion_run(
    t: Topic,
    indexes: dict[str, InvertedIndex],
    variant: str,
    depth: int = DEFAULT_DEPTH,
    k_rrf: float = DEFAULT_K_RRF,
    theta: float = DEFAULT_THETA,
) -> RankedList:
    """Search all three indexes for one topic and fuse the article rankings.

    ``fusion1`` queries with the stripped query field; ``fusion2`` with the
    expanded representation (idf judged against the abstract index). The
    paragraph ranking is max-aggregated to articles before fusing.
    """
    if variant == "fusion1":
        tokens = strip_stopwords(tokenize(t.query))
    elif variant == "fusion2":
        tokens = list(generate_query(t, indexes["abstract"], theta).terms)
    else:
        raise FusionError(f"unknown fusion variant {variant!r}")

    article_lists = []
    for granularity in ("abstract", "fulltext", "paragraph"):
        hits = search_tokens(indexes[granularity], tokens, depth, topic_id=t.topic_id, tag=variant)
        if granularity == "paragraph":
            hits = max_aggregate(hits)
        article_lists.append(hits)
    fused = rrf(article_lists, k_rrf=k_rrf, depth=depth)
    return fused.retagged(variant)
