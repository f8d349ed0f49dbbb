"""TREC run file I/O and ranking effectiveness metrics.

Run files use the six-column exchange format ``topic Q0 doc rank score tag``.
Metrics follow the standard evaluation conventions: unjudged documents count
as non-relevant, nDCG uses raw grades with a log2(rank+1) discount, and
topics without any relevant judged document are skipped and reported rather
than scored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ParseError
from .feedback import Qrels
from .ranking import RankedList, RunEntry

MAX_RUN_DEPTH = 1000

METRIC_NAMES = ("ndcg@10", "p@5", "map", "judged@5")


@dataclass
class RunFile:
    tag: str
    rankings: dict[int, RankedList] = field(default_factory=dict)

    def add(self, ranking: RankedList) -> None:
        if ranking.topic_id in self.rankings:
            raise ParseError(f"duplicate topic {ranking.topic_id} in run")
        if len(ranking.entries) > MAX_RUN_DEPTH:
            raise ParseError(
                f"topic {ranking.topic_id}: {len(ranking.entries)} entries exceeds {MAX_RUN_DEPTH}"
            )
        self.rankings[ranking.topic_id] = ranking

    def topics(self) -> list[int]:
        return sorted(self.rankings)


def format_score(score: float) -> str:
    """Shortest decimal representation that round-trips the float."""
    return repr(score)


def write_run(run: RunFile, path) -> None:
    """Write a run file, topics in ascending id order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for topic_id in run.topics():
            for entry in run.rankings[topic_id].entries:
                fh.write(
                    f"{topic_id} Q0 {entry.doc_id} {entry.rank} {format_score(entry.score)} {run.tag}\n"
                )


def parse_run(path) -> RunFile:
    """Parse a run file, validating format and per-topic invariants."""
    per_topic: dict[int, list[RunEntry]] = {}
    seen: dict[int, set[str]] = {}
    tag = "unknown"
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ParseError(f"expected 6 columns, found {len(parts)}", i)
            topic_str, q0, doc_id, rank_str, score_str, tag = parts
            if q0 != "Q0":
                raise ParseError(f"second column must be Q0, found {q0!r}", i)
            try:
                topic_id = int(topic_str)
                rank = int(rank_str)
                score = float(score_str)
            except ValueError as exc:
                raise ParseError(f"bad numeric field in {line.strip()!r}", i) from exc
            if math.isnan(score):
                raise ParseError("score is NaN", i)
            entries = per_topic.setdefault(topic_id, [])
            docs = seen.setdefault(topic_id, set())
            if doc_id in docs:
                raise ParseError(f"duplicate doc {doc_id!r} for topic {topic_id}", i)
            docs.add(doc_id)
            if rank != len(entries) + 1:
                raise ParseError(f"rank {rank} out of sequence for topic {topic_id}", i)
            if entries and score > entries[-1].score:
                raise ParseError(f"score increases at rank {rank} for topic {topic_id}", i)
            entries.append(RunEntry(doc_id, rank, score))
    run = RunFile(tag=tag)
    for topic_id in sorted(per_topic):
        run.add(RankedList(topic_id, per_topic[topic_id], tag))
    return run


def ndcg_at_k(ranking: RankedList, qrels: Qrels, k: int = 10) -> float:
    """Graded nDCG at depth k; unjudged documents have grade 0."""
    grades = sorted(
        (g for g in qrels.judged_docs(ranking.topic_id).values() if g > 0), reverse=True
    )
    if not grades:
        raise ValueError(f"topic {ranking.topic_id} has no relevant documents")
    dcg = 0.0
    for i, entry in enumerate(ranking.entries[:k], start=1):
        grade = qrels.grade(ranking.topic_id, entry.doc_id) or 0
        dcg += grade / math.log2(i + 1)
    ideal = sum(g / math.log2(i + 1) for i, g in enumerate(grades[:k], start=1))
    return dcg / ideal


def precision_at_k(ranking: RankedList, qrels: Qrels, k: int = 5) -> float:
    """Fraction of the top k that is relevant; k divides even when fewer retrieved."""
    hits = sum(
        1
        for entry in ranking.entries[:k]
        if (qrels.grade(ranking.topic_id, entry.doc_id) or 0) > 0
    )
    return hits / k


def average_precision(ranking: RankedList, qrels: Qrels, depth: int = MAX_RUN_DEPTH) -> float:
    """Binary AP over the top ``depth``, normalized by total relevant in qrels."""
    total_relevant = qrels.relevant_count(ranking.topic_id)
    if total_relevant == 0:
        raise ValueError(f"topic {ranking.topic_id} has no relevant documents")
    hits = 0
    ap = 0.0
    for i, entry in enumerate(ranking.entries[:depth], start=1):
        if (qrels.grade(ranking.topic_id, entry.doc_id) or 0) > 0:
            hits += 1
            ap += hits / i
    return ap / total_relevant


def judged_at_k(ranking: RankedList, qrels: Qrels, k: int = 5) -> float:
    """Fraction of the top k carrying any judgment."""
    judged = sum(
        1 for entry in ranking.entries[:k] if qrels.grade(ranking.topic_id, entry.doc_id) is not None
    )
    return judged / k


@dataclass
class EvalReport:
    """Per-topic metric rows plus means, with skipped topics listed."""

    tag: str
    rows: list[tuple[int, dict[str, float]]]
    means: dict[str, float]
    skipped: list[int]


def evaluate(run: RunFile, qrels: Qrels, metrics: tuple[str, ...] = METRIC_NAMES) -> EvalReport:
    """Score every topic of a run that has at least one relevant judgment.

    Topics absent from the qrels, or with no relevant document, are skipped
    and reported. Means are over evaluated topics only.
    """
    unknown = [m for m in metrics if m not in METRIC_NAMES]
    if unknown:
        raise ValueError(f"unknown metrics: {unknown}")
    rows = []
    skipped = []
    for topic_id in run.topics():
        ranking = run.rankings[topic_id]
        if qrels.relevant_count(topic_id) == 0:
            skipped.append(topic_id)
            continue
        values = {}
        for metric in metrics:
            if metric == "ndcg@10":
                values[metric] = ndcg_at_k(ranking, qrels, 10)
            elif metric == "p@5":
                values[metric] = precision_at_k(ranking, qrels, 5)
            elif metric == "map":
                values[metric] = average_precision(ranking, qrels)
            elif metric == "judged@5":
                values[metric] = judged_at_k(ranking, qrels, 5)
        rows.append((topic_id, values))
    means = {
        metric: (sum(values[metric] for _, values in rows) / len(rows)) if rows else 0.0
        for metric in metrics
    }
    return EvalReport(run.tag, rows, means, skipped)
