"""Classification-based relevance feedback and residual-collection filtering.

For each topic with judged documents, a small logistic-regression classifier
is trained to separate relevant from non-relevant documents using sparse
tf-idf features (sublinear tf, L2-normalized). At scoring time the
classifier probability is linearly interpolated with the candidate's
original score (min-max normalized over the candidate set).

The optimizer is deliberately fixed: full-batch gradient descent, learning
rate 0.5, zero init, L2 penalty lambda=1.0, at most 200 iterations or until
the gradient infinity-norm drops below 1e-6. Fixed inputs give bitwise
identical weights.

Residual filtering removes every document already judged for a topic, so a
new round is evaluated only on unexamined documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, SingleClassError
from .index import InvertedIndex, tokenize
from .ranking import RankedList

LAMBDA = 1.0
LEARNING_RATE = 0.5
MAX_ITERATIONS = 200
GRADIENT_TOL = 1e-6


@dataclass
class Qrels:
    """Graded relevance judgments: (topic_id, doc_id) -> grade in {0,1,2}."""

    judgments: dict[tuple[int, str], int] = field(default_factory=dict)
    # Raw lines as (topic_id, iteration, doc_id, grade); the iteration column
    # carries no meaning here but is preserved on write.
    entries: list[tuple[int, str, str, int]] = field(default_factory=list)

    def add(self, topic_id: int, doc_id: str, grade: int, iteration: str = "0") -> None:
        key = (topic_id, doc_id)
        if key in self.judgments:
            raise ParseError(f"duplicate judgment for topic {topic_id}, doc {doc_id!r}")
        grade = max(0, min(2, grade))
        self.judgments[key] = grade
        self.entries.append((topic_id, iteration, doc_id, grade))

    def grade(self, topic_id: int, doc_id: str) -> int | None:
        return self.judgments.get((topic_id, doc_id))

    def topics(self) -> list[int]:
        return sorted({topic_id for topic_id, _ in self.judgments})

    def judged_docs(self, topic_id: int) -> dict[str, int]:
        return {
            doc_id: grade
            for (tid, doc_id), grade in self.judgments.items()
            if tid == topic_id
        }

    def relevant_count(self, topic_id: int) -> int:
        return sum(1 for g in self.judged_docs(topic_id).values() if g > 0)


def parse_qrels(path, clamp_warnings: list[str] | None = None) -> Qrels:
    """Read whitespace-separated qrels lines: topic iteration doc grade.

    Grades outside {0,1,2} are clamped; a note is appended to
    ``clamp_warnings`` when provided.
    """
    qrels = Qrels()
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(f"expected 4 columns, found {len(parts)}", i)
            topic_str, iteration, doc_id, grade_str = parts
            try:
                topic_id = int(topic_str)
                grade = int(grade_str)
            except ValueError as exc:
                raise ParseError(f"non-numeric topic or grade: {line.strip()!r}", i) from exc
            if grade not in (0, 1, 2):
                clamped = max(0, min(2, grade))
                if clamp_warnings is not None:
                    clamp_warnings.append(
                        f"line {i}: grade {grade} clamped to {clamped} (topic {topic_id}, doc {doc_id})"
                    )
                grade = clamped
            try:
                qrels.add(topic_id, doc_id, grade, iteration)
            except ParseError as exc:
                raise ParseError(str(exc), i) from exc
    return qrels


def write_qrels(qrels: Qrels, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for topic_id, iteration, doc_id, grade in qrels.entries:
            fh.write(f"{topic_id} {iteration} {doc_id} {grade}\n")


@dataclass
class FeedbackModel:
    topic_id: int
    vocabulary: dict[str, int]
    weights: np.ndarray
    bias: float
    idf_table: dict[str, float]

    def predict(self, text: str) -> float:
        """Probability that a document is relevant to this topic."""
        vec = tfidf_vector(text, self.vocabulary, self.idf_table)
        z = self.bias
        for dim, value in vec.items():
            z += self.weights[dim] * value
        return _sigmoid(z)


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def classifier_features(idx: InvertedIndex) -> tuple[dict[str, int], dict[str, float]]:
    """Vocabulary (term -> dimension) and idf table from an index.

    Terms are sorted so dimension assignment is deterministic.
    """
    vocabulary = {term: dim for dim, term in enumerate(sorted(idx.postings))}
    return vocabulary, idx.idf_table()


def tfidf_vector(
    text: str, vocabulary: dict[str, int], idf_table: dict[str, float]
) -> dict[int, float]:
    """Sparse L2-normalized tf-idf vector: (1 + ln tf) * idf per in-vocab term."""
    counts: dict[str, int] = {}
    for token in tokenize(text):
        if token in vocabulary:
            counts[token] = counts.get(token, 0) + 1
    vec = {
        vocabulary[term]: (1.0 + math.log(tf)) * idf_table.get(term, 0.0)
        for term, tf in counts.items()
    }
    norm = math.sqrt(math.fsum(v * v for v in vec.values()))
    if norm == 0.0:
        return {}
    return {dim: v / norm for dim, v in sorted(vec.items())}


def regularized_loss(
    X: np.ndarray, y: np.ndarray, weights: np.ndarray, bias: float
) -> float:
    """Mean log-loss plus (lambda / 2m) * ||w||^2; the bias is unregularized."""
    m = len(y)
    z = X @ weights + bias
    # log(1 + exp(-|z|)) form avoids overflow for large |z|.
    log_loss = np.logaddexp(0.0, -z) * y + np.logaddexp(0.0, z) * (1.0 - y)
    return float(np.mean(log_loss) + (LAMBDA / (2.0 * m)) * np.dot(weights, weights))


def loss_gradient(
    X: np.ndarray, y: np.ndarray, weights: np.ndarray, bias: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of regularized_loss in (weights, bias)."""
    m = len(y)
    z = X @ weights + bias
    p = 1.0 / (1.0 + np.exp(-z))
    residual = p - y
    grad_w = (X.T @ residual) / m + (LAMBDA / m) * weights
    grad_b = float(np.mean(residual))
    return grad_w, grad_b


def train_classifier(
    topic_id: int,
    qrels: Qrels,
    doc_texts: dict[str, str],
    vocabulary: dict[str, int],
    idf_table: dict[str, float],
) -> FeedbackModel:
    """Train the per-topic relevance classifier on judged documents.

    Documents judged for the topic and present in doc_texts form the
    training set; grade > 0 is the positive class. Raises SingleClassError
    when only one class is available (callers fall back to unmixed scores).
    """
    judged = qrels.judged_docs(topic_id)
    doc_ids = sorted(doc_id for doc_id in judged if doc_id in doc_texts)
    labels = np.array([1.0 if judged[d] > 0 else 0.0 for d in doc_ids])
    if len(doc_ids) == 0 or labels.min() == labels.max():
        raise SingleClassError(
            f"topic {topic_id}: training set has a single class; fall back to no-feedback scores"
        )
    n_dims = len(vocabulary)
    X = np.zeros((len(doc_ids), n_dims))
    for row, doc_id in enumerate(doc_ids):
        for dim, value in tfidf_vector(doc_texts[doc_id], vocabulary, idf_table).items():
            X[row, dim] = value
    weights = np.zeros(n_dims)
    bias = 0.0
    for _ in range(MAX_ITERATIONS):
        grad_w, grad_b = loss_gradient(X, labels, weights, bias)
        inf_norm = max(float(np.max(np.abs(grad_w))) if n_dims else 0.0, abs(grad_b))
        if inf_norm < GRADIENT_TOL:
            break
        weights = weights - LEARNING_RATE * grad_w
        bias = bias - LEARNING_RATE * grad_b
    if not np.all(np.isfinite(weights)) or not math.isfinite(bias):
        raise SingleClassError(f"topic {topic_id}: training diverged")
    return FeedbackModel(topic_id, vocabulary, weights, bias, idf_table)


def minmax_normalize(scores: list[float]) -> list[float]:
    """Min-max normalize to [0,1]; a constant list maps to all 0.5."""
    if not scores:
        return []
    lo, hi = min(scores), max(scores)
    if lo == hi:
        return [0.5] * len(scores)
    return [(s - lo) / (hi - lo) for s in scores]


def classify_interpolate(
    model: FeedbackModel,
    candidates: RankedList,
    doc_texts: dict[str, str],
    alpha: float,
) -> RankedList:
    """Mix normalized original scores with classifier probabilities.

    final = (1 - alpha) * minmax(original) + alpha * P(relevant). Reranked
    descending; ties keep the prior rank. alpha=0 preserves the input
    ordering exactly.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    norm = minmax_normalize([e.score for e in candidates.entries])
    mixed = []
    for entry, norm_score in zip(candidates.entries, norm):
        prob = model.predict(doc_texts.get(entry.doc_id, ""))
        mixed.append((entry.doc_id, (1.0 - alpha) * norm_score + alpha * prob))
    order = sorted(range(len(mixed)), key=lambda i: -mixed[i][1])
    return RankedList.from_scored(candidates.topic_id, [mixed[i] for i in order], candidates.tag)


def residual_filter(candidates: RankedList, qrels: Qrels) -> RankedList:
    """Drop every candidate already judged for this topic; renumber ranks.

    Scores are untouched, so the operation is idempotent and order-stable.
    """
    kept = [
        (e.doc_id, e.score)
        for e in candidates.entries
        if qrels.grade(candidates.topic_id, e.doc_id) is None
    ]
    return RankedList.from_scored(candidates.topic_id, kept, candidates.tag)
