"""Second- and third-stage rerankers.

The pointwise stage scores each candidate independently: the candidate's
text is cut into sliding windows of 10 sentences with stride 5, every window
is scored against the query, and the document's score is the maximum window
probability. The pairwise stage takes the top candidates of a pointwise
ranking, obtains preference probabilities p[i][j] for every ordered pair,
and aggregates them into per-candidate scores

    s_i = sum over j != i of (p[i][j] + (1 - p[j][i]))

Each candidate is represented in pairwise scoring by its best pointwise
window. Prompt templates for external scorers are fixed strings so that any
conforming scorer sees byte-identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import split_sentences
from .ranking import RankedList, reranked_with_tail
from .scorer import Scorer

WINDOW_SIZE = 10
WINDOW_STRIDE = 5

DEFAULT_RERANK_DEPTH = 96
DEFAULT_MAX_TOKENS = 256
PAIRWISE_POOL = 50


def pointwise_prompt(query: str, doc: str) -> str:
    """The exact pointwise input template."""
    return f"Query: {query} Document: {doc} Relevant:"


def pairwise_prompt(query: str, doc_a: str, doc_b: str) -> str:
    """The exact pairwise input template."""
    return f"Query: {query} Document0: {doc_a} Document1: {doc_b} Relevant:"


def window_offsets(sentence_count: int) -> list[tuple[int, int]]:
    """Kept (start, end) sentence offsets under the 10/5 windowing rule.

    Window starts step by the stride while start < count; each window covers
    up to WINDOW_SIZE sentences; a window whose sentence range is contained
    in an earlier window is dropped.
    """
    kept: list[tuple[int, int]] = []
    for start in range(0, sentence_count, WINDOW_STRIDE):
        end = min(start + WINDOW_SIZE, sentence_count)
        if any(ps <= start and end <= pe for ps, pe in kept):
            continue
        kept.append((start, end))
    return kept


def make_windows(text: str) -> list[str]:
    """Sliding-window spans of a text; empty text yields no windows."""
    sentences = split_sentences(text)
    return [" ".join(sentences[s:e]) for s, e in window_offsets(len(sentences))]


def truncate_tokens(text: str, max_tokens: int) -> str:
    """Keep the first max_tokens whitespace-delimited tokens."""
    return " ".join(text.split()[:max_tokens])


def score_documents(
    scorer: Scorer, query: str, texts: Sequence[str], max_tokens: int = DEFAULT_MAX_TOKENS
) -> list[tuple[float, str]]:
    """Pointwise-score documents; returns (max window probability, best window).

    All windows of all documents go to the scorer as one batch. A document
    with no sentences is scored as a single empty window.
    """
    windows_per_doc: list[list[str]] = []
    flat: list[str] = []
    for text in texts:
        windows = [truncate_tokens(w, max_tokens) for w in make_windows(text)] or [""]
        windows_per_doc.append(windows)
        flat.extend(windows)
    probs = scorer.score_pointwise(query, flat)
    results = []
    pos = 0
    for windows in windows_per_doc:
        doc_probs = probs[pos : pos + len(windows)]
        pos += len(windows)
        best = max(range(len(windows)), key=lambda i: (doc_probs[i], -i))
        results.append((doc_probs[best], windows[best]))
    return results


def pointwise_rerank(
    scorer: Scorer,
    query: str,
    candidates: RankedList,
    doc_texts: Mapping[str, str],
    depth: int = DEFAULT_RERANK_DEPTH,
    max_tokens: int = DEFAULT_MAX_TOKENS,
) -> RankedList:
    """Rescore the top ``depth`` candidates pointwise and rerank them.

    Ties keep the prior order. Candidates beyond ``depth`` keep their
    relative order below the rescored head, with scores spaced below the
    minimum rescored score.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    head = candidates.entries[:depth]
    tail = [e.doc_id for e in candidates.entries[depth:]]
    if not head:
        return RankedList(candidates.topic_id, [], candidates.tag)
    scored = score_documents(scorer, query, [doc_texts[e.doc_id] for e in head], max_tokens)
    order = sorted(range(len(head)), key=lambda i: -scored[i][0])
    reranked = [(head[i].doc_id, scored[i][0]) for i in order]
    return reranked_with_tail(candidates.topic_id, reranked, tail, candidates.tag)


@dataclass
class ScoreMatrix:
    """Pairwise preference probabilities over an ordered candidate pool.

    probs[i][j] is the probability that candidate i is more relevant than
    candidate j; the diagonal is unused.
    """

    candidates: list[str]
    probs: list[list[float]]

    def validate(self) -> None:
        n = len(self.candidates)
        if len(self.probs) != n or any(len(row) != n for row in self.probs):
            raise ValueError("probability matrix shape mismatch")
        for i in range(n):
            for j in range(n):
                if i != j and not 0.0 <= self.probs[i][j] <= 1.0:
                    raise ValueError(f"p[{i}][{j}] = {self.probs[i][j]} outside [0,1]")


def preference_scores(matrix: ScoreMatrix) -> list[float]:
    """Aggregate a preference matrix into per-candidate scores s_i.

    s_i = sum over j != i of (p[i][j] + (1 - p[j][i])). Terms are combined
    with math.fsum so the result does not depend on accumulation order.
    """
    matrix.validate()
    n = len(matrix.candidates)
    p = matrix.probs
    return [
        math.fsum(p[i][j] + (1.0 - p[j][i]) for j in range(n) if j != i) if n > 1 else 0.0
        for i in range(n)
    ]


def pairwise_rerank(
    scorer: Scorer,
    query: str,
    candidates: RankedList,
    doc_texts: Mapping[str, str],
    max_tokens: int = DEFAULT_MAX_TOKENS,
    pool_size: int = PAIRWISE_POOL,
) -> RankedList:
    """Pairwise-rerank the top ``pool_size`` candidates of a pointwise ranking.

    Each pool candidate is represented by its best pointwise window. All
    ordered pairs are scored, aggregated via preference_scores, and the pool
    is reordered by s_i descending with ties keeping the prior rank.
    Candidates outside the pool keep their order below.
    """
    pool = candidates.entries[:pool_size]
    tail = [e.doc_id for e in candidates.entries[pool_size:]]
    if not pool:
        return RankedList(candidates.topic_id, [], candidates.tag)
    if len(pool) == 1:
        return candidates
    pointwise = score_documents(scorer, query, [doc_texts[e.doc_id] for e in pool], max_tokens)
    windows = [best_window for _, best_window in pointwise]
    n = len(pool)
    pairs = [(windows[i], windows[j]) for i in range(n) for j in range(n) if i != j]
    probs = scorer.score_pairwise(query, pairs)
    matrix = [[0.0] * n for _ in range(n)]
    pos = 0
    for i in range(n):
        for j in range(n):
            if i != j:
                matrix[i][j] = probs[pos]
                pos += 1
    scores = preference_scores(ScoreMatrix([e.doc_id for e in pool], matrix))
    order = sorted(range(n), key=lambda i: -scores[i])
    reranked = [(pool[i].doc_id, scores[i]) for i in order]
    return reranked_with_tail(candidates.topic_id, reranked, tail, candidates.tag)
