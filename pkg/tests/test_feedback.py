import math
import random

import numpy as np
import pytest

from litsearch.errors import ParseError, SingleClassError
from litsearch.feedback import (
    Qrels,
    classifier_features,
    classify_interpolate,
    loss_gradient,
    minmax_normalize,
    parse_qrels,
    regularized_loss,
    residual_filter,
    tfidf_vector,
    train_classifier,
    write_qrels,
)
from litsearch.ranking import RankedList


def ranked(pairs, topic_id=1, tag="t"):
    return RankedList.from_scored(topic_id, pairs, tag)


VOCAB = {"alpha": 0, "beta": 1, "gamma": 2, "delta": 3}
IDF = {"alpha": 1.0, "beta": 2.0, "gamma": 0.5, "delta": 1.5}


class TestQrelsIO:
    def test_parse_fixture(self, qrels):
        assert qrels.topics() == [1, 2, 3, 4, 5]
        for t in qrels.topics():
            judged = qrels.judged_docs(t)
            assert sum(1 for g in judged.values() if g > 0) >= 3
            assert sum(1 for g in judged.values() if g == 0) >= 5

    def test_grade_clamping_with_warning(self, tmp_path):
        path = tmp_path / "q.txt"
        path.write_text("1 0 d1 3\n1 0 d2 -1\n")
        warnings = []
        qrels = parse_qrels(path, clamp_warnings=warnings)
        assert qrels.grade(1, "d1") == 2
        assert qrels.grade(1, "d2") == 0
        assert len(warnings) == 2

    def test_duplicate_judgment_errors(self, tmp_path):
        path = tmp_path / "q.txt"
        path.write_text("1 0 d1 1\n1 1 d1 2\n")
        with pytest.raises(ParseError):
            parse_qrels(path)

    def test_wrong_columns_errors(self, tmp_path):
        path = tmp_path / "q.txt"
        path.write_text("1 d1 1\n")
        with pytest.raises(ParseError, match="4 columns"):
            parse_qrels(path)

    def test_iteration_column_preserved_on_write(self, tmp_path):
        src = tmp_path / "src.txt"
        src.write_text("1 round2 d1 1\n2 0 d2 0\n")
        qrels = parse_qrels(src)
        out = tmp_path / "out.txt"
        write_qrels(qrels, out)
        assert out.read_text() == "1 round2 d1 1\n2 0 d2 0\n"


class TestTfidfVector:
    def test_single_term_is_unit_vector(self):
        vec = tfidf_vector("alpha", VOCAB, IDF)
        assert vec == {0: 1.0}

    def test_all_oov_is_zero_vector(self):
        assert tfidf_vector("omega psi", VOCAB, IDF) == {}

    def test_l2_normalized(self):
        vec = tfidf_vector("alpha beta beta gamma", VOCAB, IDF)
        assert math.fsum(v * v for v in vec.values()) == pytest.approx(1.0, abs=1e-12)

    def test_tf_doubling_factor(self):
        # Pre-normalization weight ratio for tf -> 2tf is (1+ln 2t)/(1+ln t).
        t = 3
        one = (1.0 + math.log(t)) * IDF["alpha"]
        two = (1.0 + math.log(2 * t)) * IDF["alpha"]
        vec_t = tfidf_vector(" ".join(["alpha"] * t), VOCAB, IDF)
        vec_2t = tfidf_vector(" ".join(["alpha"] * 2 * t), VOCAB, IDF)
        # both normalize to a unit vector on the same dimension
        assert vec_t == vec_2t == {0: 1.0}
        assert two / one == pytest.approx((1 + math.log(2 * t)) / (1 + math.log(t)))


class TestTrainClassifier:
    def make_qrels(self, labels):
        qrels = Qrels()
        for doc_id, grade in labels.items():
            qrels.add(1, doc_id, grade)
        return qrels

    def test_separable_two_docs(self):
        qrels = self.make_qrels({"pos": 2, "neg": 0})
        texts = {"pos": "alpha alpha beta", "neg": "gamma delta delta"}
        model = train_classifier(1, qrels, texts, VOCAB, IDF)
        assert model.predict(texts["pos"]) > 0.5
        assert model.predict(texts["neg"]) < 0.5

    def test_single_class_errors(self):
        qrels = self.make_qrels({"a": 1, "b": 2})
        texts = {"a": "alpha", "b": "beta"}
        with pytest.raises(SingleClassError):
            train_classifier(1, qrels, texts, VOCAB, IDF)

    def test_judged_docs_without_text_are_skipped(self):
        qrels = self.make_qrels({"pos": 2, "neg": 0, "ghost": 1})
        texts = {"pos": "alpha", "neg": "gamma"}
        model = train_classifier(1, qrels, texts, VOCAB, IDF)
        assert model.predict("alpha") > 0.5

    def test_loss_decreases_monotonically(self):
        qrels = self.make_qrels({f"d{i}": (2 if i < 3 else 0) for i in range(6)})
        texts = {
            "d0": "alpha alpha beta",
            "d1": "alpha beta beta",
            "d2": "alpha alpha alpha gamma",
            "d3": "gamma delta",
            "d4": "delta delta gamma",
            "d5": "gamma gamma",
        }
        doc_ids = sorted(texts)
        y = np.array([1.0 if qrels.grade(1, d) > 0 else 0.0 for d in doc_ids])
        X = np.zeros((6, len(VOCAB)))
        for row, doc_id in enumerate(doc_ids):
            for dim, value in tfidf_vector(texts[doc_id], VOCAB, IDF).items():
                X[row, dim] = value
        w = np.zeros(len(VOCAB))
        b = 0.0
        losses = [regularized_loss(X, y, w, b)]
        for _ in range(50):
            gw, gb = loss_gradient(X, y, w, b)
            w = w - 0.5 * gw
            b = b - 0.5 * gb
            losses.append(regularized_loss(X, y, w, b))
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            m, d = rng.integers(2, 8), rng.integers(1, 6)
            X = rng.normal(size=(m, d))
            y = rng.integers(0, 2, size=m).astype(float)
            w = rng.normal(scale=0.5, size=d)
            b = float(rng.normal(scale=0.5))
            grad_w, grad_b = loss_gradient(X, y, w, b)
            h = 1e-6
            for k in range(d):
                bump = np.zeros(d)
                bump[k] = h
                numeric = (
                    regularized_loss(X, y, w + bump, b) - regularized_loss(X, y, w - bump, b)
                ) / (2 * h)
                assert abs(numeric - grad_w[k]) <= 1e-5 * max(1.0, abs(numeric))
            numeric_b = (
                regularized_loss(X, y, w, b + h) - regularized_loss(X, y, w, b - h)
            ) / (2 * h)
            assert abs(numeric_b - grad_b) <= 1e-5 * max(1.0, abs(numeric_b))

    def test_training_is_bitwise_deterministic(self, qrels, indexes):
        vocab, idf = classifier_features(indexes["abstract"])
        texts = {uid: text for uid, (_, text) in indexes["abstract"].unit_meta.items()}
        a = train_classifier(1, qrels, texts, vocab, idf)
        b = train_classifier(1, qrels, texts, vocab, idf)
        assert np.array_equal(a.weights, b.weights)
        assert a.bias == b.bias


class TestClassifyInterpolate:
    def make_model(self):
        qrels = Qrels()
        qrels.add(1, "pos", 2)
        qrels.add(1, "neg", 0)
        texts = {"pos": "alpha beta", "neg": "gamma delta"}
        return train_classifier(1, qrels, texts, VOCAB, IDF)

    def test_arithmetic_of_mixing(self):
        # norm_orig 0.8, classifier 0.4, alpha 0.5 -> 0.6
        assert (1 - 0.5) * 0.8 + 0.5 * 0.4 == pytest.approx(0.6)

    def test_alpha_zero_preserves_order(self):
        model = self.make_model()
        candidates = ranked([("d1", 9.0), ("d2", 4.0), ("d3", 1.0)])
        out = classify_interpolate(model, candidates, {"d1": "gamma", "d2": "alpha", "d3": ""}, 0.0)
        assert out.doc_ids() == candidates.doc_ids()

    def test_alpha_one_orders_by_classifier(self):
        model = self.make_model()
        texts = {"d1": "gamma delta", "d2": "alpha beta"}
        candidates = ranked([("d1", 9.0), ("d2", 4.0)])
        out = classify_interpolate(model, candidates, texts, 1.0)
        assert out.doc_ids() == ["d2", "d1"]

    def test_alpha_zero_argsort_equality_random(self):
        model = self.make_model()
        rng = random.Random(6)
        for _ in range(20):
            n = rng.randrange(1, 15)
            scores = sorted((rng.uniform(-5, 20) for _ in range(n)), reverse=True)
            candidates = ranked([(f"d{i}", s) for i, s in enumerate(scores)])
            texts = {f"d{i}": rng.choice(["alpha", "gamma", ""]) for i in range(n)}
            out = classify_interpolate(model, candidates, texts, 0.0)
            assert out.doc_ids() == candidates.doc_ids()

    def test_invalid_alpha(self):
        model = self.make_model()
        with pytest.raises(ValueError):
            classify_interpolate(model, ranked([("d", 1.0)]), {}, 1.5)

    def test_minmax_constant_maps_to_half(self):
        assert minmax_normalize([3.0, 3.0]) == [0.5, 0.5]
        assert minmax_normalize([]) == []


class TestResidualFilter:
    def make_qrels(self):
        qrels = Qrels()
        qrels.add(1, "judged0", 0)
        qrels.add(1, "judged2", 2)
        return qrels

    def test_removes_judged_and_renumbers(self):
        qrels = self.make_qrels()
        out = residual_filter(ranked([("a", 3.0), ("judged0", 2.0), ("b", 1.0)]), qrels)
        assert out.doc_ids() == ["a", "b"]
        assert [e.rank for e in out.entries] == [1, 2]
        assert [e.score for e in out.entries] == [3.0, 1.0]

    def test_no_judgments_identity(self):
        qrels = self.make_qrels()
        lst = ranked([("x", 2.0), ("y", 1.0)], topic_id=9)
        out = residual_filter(lst, qrels)
        assert [(e.doc_id, e.rank, e.score) for e in out.entries] == [
            (e.doc_id, e.rank, e.score) for e in lst.entries
        ]

    def test_all_judged_empty(self):
        qrels = self.make_qrels()
        out = residual_filter(ranked([("judged0", 2.0), ("judged2", 1.0)]), qrels)
        assert out.entries == []

    def test_idempotent(self):
        qrels = self.make_qrels()
        lst = ranked([("a", 3.0), ("judged2", 2.0), ("b", 1.0)])
        once = residual_filter(lst, qrels)
        twice = residual_filter(once, qrels)
        assert [(e.doc_id, e.rank, e.score) for e in once.entries] == [
            (e.doc_id, e.rank, e.score) for e in twice.entries
        ]

    def test_commutes_under_qrels_union(self):
        qa, qb, qunion = Qrels(), Qrels(), Qrels()
        qa.add(1, "x", 1)
        qb.add(1, "y", 0)
        qunion.add(1, "x", 1)
        qunion.add(1, "y", 0)
        lst = ranked([("x", 3.0), ("y", 2.0), ("z", 1.0)])
        ab = residual_filter(residual_filter(lst, qa), qb)
        ba = residual_filter(residual_filter(lst, qb), qa)
        union = residual_filter(lst, qunion)
        assert ab.doc_ids() == ba.doc_ids() == union.doc_ids() == ["z"]
