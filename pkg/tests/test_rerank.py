import random

import pytest

from litsearch.ranking import RankedList
from litsearch.rerank import (
    ScoreMatrix,
    make_windows,
    pairwise_prompt,
    pairwise_rerank,
    pointwise_prompt,
    pointwise_rerank,
    preference_scores,
    truncate_tokens,
    window_offsets,
)
from litsearch.scorer import ReferenceScorer


def ranked(pairs, topic_id=1, tag="t"):
    return RankedList.from_scored(topic_id, pairs, tag)


class CannedScorer:
    """Pointwise probabilities looked up by window text."""

    def __init__(self, by_window, default=0.5):
        self.by_window = by_window
        self.default = default

    def score_pointwise(self, query, docs):
        return [self.by_window.get(d, self.default) for d in docs]

    def score_pairwise(self, query, pairs):
        return [0.5 for _ in pairs]


class MatrixScorer:
    """Pairwise probabilities looked up by (doc, doc) text pair."""

    def __init__(self, pointwise, matrix_by_text):
        self.pointwise = pointwise
        self.matrix_by_text = matrix_by_text

    def score_pointwise(self, query, docs):
        return [self.pointwise.get(d, 0.5) for d in docs]

    def score_pairwise(self, query, pairs):
        return [self.matrix_by_text[(a, b)] for a, b in pairs]


def sentences_text(n):
    return " ".join(f"Sentence number {i} here." for i in range(n))


class TestWindows:
    def test_twelve_sentences(self):
        assert window_offsets(12) == [(0, 10), (5, 12)]

    def test_ten_sentences_single_window(self):
        assert window_offsets(10) == [(0, 10)]

    def test_three_sentences(self):
        assert window_offsets(3) == [(0, 3)]

    def test_empty_text_no_windows(self):
        assert make_windows("") == []

    def test_window_texts(self):
        text = sentences_text(12)
        windows = make_windows(text)
        assert len(windows) == 2
        assert windows[0].startswith("Sentence number 0")
        assert windows[1].startswith("Sentence number 5")
        assert windows[1].endswith("11 here.")

    def test_truncate_tokens(self):
        assert truncate_tokens("a b c d", 2) == "a b"
        assert truncate_tokens("a b", 10) == "a b"


class TestPrompts:
    def test_pointwise_template(self):
        assert pointwise_prompt("q1", "d1") == "Query: q1 Document: d1 Relevant:"

    def test_pairwise_template(self):
        assert (
            pairwise_prompt("q", "di", "dj")
            == "Query: q Document0: di Document1: dj Relevant:"
        )

    def test_contains_query_and_doc_verbatim(self):
        rng = random.Random(2)
        for _ in range(20):
            q = "q" + str(rng.random())
            d = "doc body " + str(rng.random())
            rendered = pointwise_prompt(q, d)
            assert q in rendered and d in rendered


class TestPointwiseRerank:
    def test_document_score_is_max_window(self):
        # 12 sentences -> 2 windows; give them different probabilities.
        text = sentences_text(12)
        windows = make_windows(text)
        scorer = CannedScorer({windows[0]: 0.2, windows[1]: 0.9})
        candidates = ranked([("d1", 1.0)])
        out = pointwise_rerank(scorer, "q", candidates, {"d1": text})
        assert out.entries[0].score == 0.9

    def test_depth_one_rescores_only_top(self):
        scorer = CannedScorer({"Low text.": 0.1, "High text.": 0.9})
        candidates = ranked([("d1", 2.0), ("d2", 1.0)])
        texts = {"d1": "Low text.", "d2": "High text."}
        out = pointwise_rerank(scorer, "q", candidates, texts, depth=1)
        # d2 was never rescored: it stays below d1 regardless of its text.
        assert out.doc_ids() == ["d1", "d2"]
        assert out.entries[0].score == 0.1
        assert out.entries[1].score < 0.1

    def test_constant_scorer_is_stable(self):
        scorer = CannedScorer({}, default=0.5)
        candidates = ranked([(f"d{i}", 10.0 - i) for i in range(8)])
        texts = {f"d{i}": f"Text {i}." for i in range(8)}
        out = pointwise_rerank(scorer, "q", candidates, texts)
        assert out.doc_ids() == [f"d{i}" for i in range(8)]

    def test_candidate_set_preserved(self):
        rng = random.Random(4)
        for _ in range(20):
            n = rng.randrange(1, 12)
            candidates = ranked([(f"d{i}", float(n - i)) for i in range(n)])
            texts = {f"d{i}": f"Alpha {i}." for i in range(n)}
            scorer = CannedScorer({f"Alpha {i}.": rng.random() for i in range(n)})
            depth = rng.randrange(1, n + 2)
            out = pointwise_rerank(scorer, "q", candidates, texts, depth=depth)
            assert sorted(out.doc_ids()) == sorted(candidates.doc_ids())
            out.validate()

    def test_empty_candidates(self):
        out = pointwise_rerank(CannedScorer({}), "q", ranked([]), {})
        assert out.entries == []

    def test_doc_without_sentences_scored_as_empty_window(self):
        scorer = CannedScorer({"": 0.7})
        out = pointwise_rerank(scorer, "q", ranked([("d1", 1.0)]), {"d1": ""})
        assert out.entries[0].score == 0.7


class TestPreferenceScores:
    def test_two_candidate_hand_case(self):
        matrix = ScoreMatrix(["d0", "d1"], [[0.0, 0.8], [0.3, 0.0]])
        s = preference_scores(matrix)
        assert s[0] == pytest.approx(1.5, abs=1e-12)
        assert s[1] == pytest.approx(0.5, abs=1e-12)

    def test_antisymmetric_identity(self):
        rng = random.Random(8)
        for n in (2, 5, 17, 50):
            probs = [[0.0] * n for _ in range(n)]
            for i in range(n):
                for j in range(i + 1, n):
                    p = rng.randrange(2 ** 20 + 1) / 2 ** 20
                    probs[i][j] = p
                    probs[j][i] = 1.0 - p
            s = preference_scores(ScoreMatrix([f"d{i}" for i in range(n)], probs))
            assert sum(s) == n * (n - 1)

    def test_all_half_gives_equal_scores(self):
        n = 50
        probs = [[0.5] * n for _ in range(n)]
        s = preference_scores(ScoreMatrix([f"d{i}" for i in range(n)], probs))
        assert all(si == 49.0 for si in s)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            preference_scores(ScoreMatrix(["a", "b"], [[0.0, 1.2], [0.3, 0.0]]))


class TestPairwiseRerank:
    def make_setup(self, probs):
        n = len(probs)
        docs = [f"d{i}" for i in range(n)]
        texts = {f"d{i}": f"Text {i}." for i in range(n)}
        windows = {f"d{i}": f"Text {i}." for i in range(n)}
        matrix_by_text = {}
        for i in range(n):
            for j in range(n):
                if i != j:
                    matrix_by_text[(windows[docs[i]], windows[docs[j]])] = probs[i][j]
        candidates = ranked([(d, float(n - i)) for i, d in enumerate(docs)])
        scorer = MatrixScorer({texts[d]: 0.5 for d in docs}, matrix_by_text)
        return scorer, candidates, texts

    def test_two_candidates(self):
        scorer, candidates, texts = self.make_setup([[0.0, 0.8], [0.3, 0.0]])
        out = pairwise_rerank(scorer, "q", candidates, texts)
        assert out.doc_ids() == ["d0", "d1"]
        assert out.entries[0].score == pytest.approx(1.5, abs=1e-12)
        assert out.entries[1].score == pytest.approx(0.5, abs=1e-12)

    def test_all_half_keeps_order(self):
        n = 6
        scorer, candidates, texts = self.make_setup([[0.5] * n for _ in range(n)])
        out = pairwise_rerank(scorer, "q", candidates, texts)
        assert out.doc_ids() == candidates.doc_ids()

    def test_pool_candidates_keep_tail_below(self):
        n = 4
        probs = [[0.5] * n for _ in range(n)]
        probs[2][0] = probs[2][1] = 1.0
        probs[0][2] = probs[1][2] = 0.0
        scorer, candidates, texts = self.make_setup(probs)
        out = pairwise_rerank(scorer, "q", candidates, texts, pool_size=3)
        assert out.doc_ids()[0] == "d2"
        assert out.doc_ids()[-1] == "d3"  # outside the pool, stays last
        out.validate()

    def test_ordering_matches_brute_force(self):
        rng = random.Random(21)
        for _ in range(20):
            n = rng.randrange(2, 12)
            probs = [[0.0] * n for _ in range(n)]
            for i in range(n):
                for j in range(n):
                    if i != j:
                        probs[i][j] = rng.randrange(2 ** 20 + 1) / 2 ** 20
            scorer, candidates, texts = self.make_setup(probs)
            out = pairwise_rerank(scorer, "q", candidates, texts)
            s = [
                sum(probs[i][j] + (1 - probs[j][i]) for j in range(n) if j != i)
                for i in range(n)
            ]
            expected = [f"d{i}" for i in sorted(range(n), key=lambda i: -s[i])]
            assert out.doc_ids() == expected


class TestReferenceScorer:
    def test_no_query_terms_below_half(self):
        scorer = ReferenceScorer()
        (p,) = scorer.score_pointwise("antibody tests", ["unrelated words only"])
        assert p < 0.5

    def test_identical_docs_pairwise_half(self):
        scorer = ReferenceScorer()
        (p,) = scorer.score_pairwise("q terms", [("same text", "same text")])
        assert p == 0.5

    def test_full_coverage_beats_partial(self):
        scorer = ReferenceScorer()
        query = "antibody tests serology"
        full = "antibody tests serology results"
        partials = [
            "antibody tests results here",
            "antibody results words here",
            "serology words other items",
        ]
        p_full = scorer.score_pointwise(query, [full])[0]
        for p in scorer.score_pointwise(query, partials):
            assert p_full > p

    def test_pairwise_complement_exact(self):
        scorer = ReferenceScorer(idf={"alpha": 2.0, "beta": 0.5})
        docs = ["alpha text", "beta text", "alpha beta", "nothing"]
        for a in docs:
            for b in docs:
                pab = scorer.score_pairwise("alpha beta", [(a, b)])[0]
                pba = scorer.score_pairwise("alpha beta", [(b, a)])[0]
                assert pab + pba == 1.0

    def test_idf_weighting_prefers_rare_term(self):
        scorer = ReferenceScorer(idf={"rare": 5.0, "common": 0.1})
        p_rare, p_common = scorer.score_pointwise("rare common", ["rare only", "common only"])
        assert p_rare > p_common
