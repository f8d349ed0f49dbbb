import json
import random

import pytest

from litsearch.corpus import (
    Article,
    generate_units,
    parse_article,
    serialize_article,
    split_sentences,
)
from litsearch.errors import ParseError, RejectionError


def make_line(**overrides):
    record = {
        "id": "a1",
        "title": "T",
        "abstract": "A",
        "paragraphs": ["p one", "p two"],
        "authors": ["X, Y"],
        "journal": "J",
        "source": "S",
        "publish_time": "2020-03-01",
        "url": "http://example.org/a1",
    }
    record.update(overrides)
    return json.dumps(record)


class TestParseArticle:
    def test_direct_field_mapping(self):
        a = parse_article(make_line())
        assert a.article_id == "a1"
        assert a.title == "T"
        assert a.abstract == "A"
        assert len(a.paragraphs) == 2

    def test_missing_title_rejected(self):
        with pytest.raises(RejectionError):
            parse_article(make_line(title=""))
        with pytest.raises(RejectionError):
            parse_article('{"id": "a1"}')

    def test_missing_id_rejected(self):
        with pytest.raises(RejectionError):
            parse_article('{"title": "T"}')

    def test_unknown_extra_fields_ignored(self):
        a = parse_article(make_line(doi="10.1/xyz", license="cc-by"))
        assert a.article_id == "a1"

    def test_malformed_line_carries_line_number(self):
        with pytest.raises(ParseError) as exc:
            parse_article("{not json", line_number=17)
        assert exc.value.line_number == 17
        assert "17" in str(exc.value)

    def test_optional_fields_default_empty(self):
        a = parse_article('{"id": "a1", "title": "T"}')
        assert a.abstract == ""
        assert a.paragraphs == ()
        assert a.publish_time == ""

    def test_roundtrip_identity(self):
        rng = random.Random(7)
        for _ in range(50):
            a = Article(
                article_id=f"a{rng.randrange(1000)}",
                title="t" + str(rng.random()),
                abstract=rng.choice(["", "some abstract text"]),
                paragraphs=tuple(f"p{i}" for i in range(rng.randrange(4))),
                authors=tuple(f"au{i}" for i in range(rng.randrange(3))),
                journal=rng.choice(["", "J"]),
                source=rng.choice(["", "S"]),
                publish_time=rng.choice(["", "2020", "2020-01-02"]),
                url=rng.choice(["", "http://x"]),
            )
            assert parse_article(serialize_article(a)) == a


class TestGenerateUnits:
    def test_paragraph_yields_n_plus_one(self):
        a = Article("a1", "T", "A", ("p1", "p2"))
        units = generate_units(a, "paragraph")
        assert len(units) == 3
        assert [u.unit_id for u in units] == ["a1", "a1.0", "a1.1"]
        assert units[0].paragraph_index is None
        assert units[1].paragraph_index == 0

    def test_paragraph_no_paragraphs_yields_one(self):
        units = generate_units(Article("a1", "T", "A"), "paragraph")
        assert len(units) == 1
        assert units[0].unit_id == "a1"

    def test_fulltext_single_unit_contains_all_paragraphs(self):
        a = Article("a1", "T", "A", ("p1", "p2"))
        (unit,) = generate_units(a, "fulltext")
        assert unit.unit_id == "a1"
        assert "p1" in unit.text and "p2" in unit.text

    def test_abstract_unit_text(self):
        (unit,) = generate_units(Article("a1", "T", "A"), "abstract")
        assert unit.text == "T A"

    def test_empty_abstract_title_only(self):
        (unit,) = generate_units(Article("a1", "T", ""), "abstract")
        assert unit.text == "T"
        # Paragraph granularity still emits the title+abstract unit.
        units = generate_units(Article("a1", "T", "", ("p",)), "paragraph")
        assert len(units) == 2
        assert units[0].text == "T"

    def test_unit_count_property_random_articles(self):
        rng = random.Random(11)
        for _ in range(100):
            n = rng.randrange(8)
            a = Article("x", "Title words", "Abs", tuple(f"uniquepar{i}" for i in range(n)))
            units = generate_units(a, "paragraph")
            assert len(units) == n + 1
            # every paragraph appears exactly once across units
            for i in range(n):
                carriers = [u for u in units if f"uniquepar{i}" in u.text]
                assert len(carriers) == 1
            # the title appears in every unit
            assert all("Title words" in u.text for u in units)


class TestSplitSentences:
    def test_terminal_punctuation(self):
        assert split_sentences("A b. C d? E!") == ["A b.", "C d?", "E!"]

    def test_abbreviation_guard(self):
        assert split_sentences("See Fig. 2. Done.") == ["See Fig. 2.", "Done."]
        assert split_sentences("Smith et al. Reported cases.") == ["Smith et al. Reported cases."]
        assert split_sentences("Use e.g. Apples. Next one.") == ["Use e.g. Apples.", "Next one."]

    def test_empty(self):
        assert split_sentences("") == []
        assert split_sentences("   \n ") == []

    def test_no_split_without_uppercase_follow(self):
        assert split_sentences("version 1.2 is out. Yes.") == ["version 1.2 is out.", "Yes."]
        assert split_sentences("a. b. c.") == ["a. b. c."]

    def test_concatenation_preserves_text(self):
        rng = random.Random(3)
        pieces = ["Alpha beta.", "Gamma delta?", "Up and down!", "No 42 here.", "See Fig. 3. Ok."]
        for _ in range(50):
            text = "  ".join(rng.choice(pieces) for _ in range(rng.randrange(1, 6)))
            sentences = split_sentences(text)
            assert all(s for s in sentences)
            assert " ".join(sentences) == " ".join(text.split())
