"""Ranked result lists, the currency every pipeline stage trades in.

A RankedList holds one topic's ranking: contiguous 1-based ranks, scores
non-increasing with rank, and no duplicate doc ids. These invariants are
enforced at construction so downstream stages (fusion, reranking, run
serialization) can rely on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import FusionError


@dataclass(frozen=True)
class RunEntry:
    doc_id: str
    rank: int
    score: float


@dataclass
class RankedList:
    topic_id: int
    entries: list[RunEntry]
    tag: str

    @classmethod
    def from_scored(cls, topic_id: int, scored: Iterable[tuple[str, float]], tag: str) -> "RankedList":
        """Build from (doc_id, score) pairs already in final order."""
        entries = [RunEntry(doc_id, rank, score) for rank, (doc_id, score) in enumerate(scored, start=1)]
        lst = cls(topic_id, entries, tag)
        lst.validate()
        return lst

    def validate(self) -> None:
        seen: set[str] = set()
        prev_score: float | None = None
        for i, entry in enumerate(self.entries, start=1):
            if entry.rank != i:
                raise FusionError(f"topic {self.topic_id}: rank {entry.rank} at position {i}")
            if entry.doc_id in seen:
                raise FusionError(f"topic {self.topic_id}: duplicate doc {entry.doc_id!r}")
            seen.add(entry.doc_id)
            if prev_score is not None and entry.score > prev_score:
                raise FusionError(
                    f"topic {self.topic_id}: score increases at rank {i} ({entry.score} > {prev_score})"
                )
            prev_score = entry.score

    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def truncated(self, depth: int) -> "RankedList":
        return RankedList(self.topic_id, self.entries[:depth], self.tag)

    def retagged(self, tag: str) -> "RankedList":
        return RankedList(self.topic_id, list(self.entries), tag)

    def __len__(self) -> int:
        return len(self.entries)


def reranked_with_tail(
    topic_id: int,
    reranked: Sequence[tuple[str, float]],
    tail: Sequence[str],
    tag: str,
) -> RankedList:
    """Assemble a full ranking from a rescored head and an untouched tail.

    Tail documents keep their relative order; their scores are spaced
    linearly below the minimum rescored score so the run's score column
    stays strictly monotone below the head.
    """
    entries = list(reranked)
    floor = min((s for _, s in entries), default=0.0)
    step = 1.0 / (len(tail) + 1)
    for j, doc_id in enumerate(tail, start=1):
        entries.append((doc_id, floor - j * step))
    return RankedList.from_scored(topic_id, entries, tag)
