#!/usr/bin/env python3
"""Regenerate the planted test fixtures under tests/fixtures/.

The corpus is 50 synthetic articles across 5 themes (10 each). Every
abstract mentions "coronavirus", so keyword queries of the form
"coronavirus ..." retrieve the whole collection and rankings are decided by
the distinctive keywords. For every theme/topic:

  * article 0 ("anchor") is the strongest positive; the first theme's
    anchor carries an antibodies-dense paragraph that the service tests
    rely on
  * articles 0-3 are judged relevant in the training qrels (grades 2/2/1/1)
  * articles 4-6 are held-out relevant (qrels_heldout.txt, never judged in
    the training qrels); they carry the theme vocabulary but none of the
    query keywords, so keyword search ranks them poorly and the feedback
    classifier has something to fix
  * articles 7-9 are judged non-relevant; 7 is stuffed with query keywords
    so first-stage ranking likes it

Each theme also has a rare "marker" term planted in exactly four abstracts
(judged positive 1 and the three held-out positives) and mentioned in the
topic's question field, giving the query-expansion path real signal.

Golden run files are NOT written here; they are frozen from the CLI (see
README). Everything is deterministic; rerunning this script must be a
no-op on committed fixtures.
"""

import json
import random
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

BACKGROUND = [
    "study", "patients", "results", "data", "analysis", "methods", "clinical",
    "disease", "health", "pandemic", "outbreak", "infection", "cases",
    "hospital", "samples", "population", "evidence", "review", "research",
    "model", "severity", "treatment", "symptoms", "reported", "period",
]

THEMES = [
    {
        "key": "sero",
        "query": "coronavirus antibody tests",
        "question": "serological tests that detect antibodies of COVID-19 including neutralization assays",
        "narrative": "Studies describing assays that measure antibody responses, "
                     "including sensitivity and specificity of serological testing.",
        "core": ["antibody", "tests"],
        "rare": ["serological", "antibodies", "immunoassay", "elisa", "igg", "igm", "seroprevalence"],
        "marker": "neutralization",
    },
    {
        "key": "vacc",
        "query": "coronavirus vaccine candidates",
        "question": "progress of immunization trials and booster adjuvant vaccine platforms",
        "narrative": "Reports on vaccine development, platform comparisons, and "
                     "early-phase immunogenicity results.",
        "core": ["vaccine", "candidates"],
        "rare": ["immunization", "adjuvant", "antigen", "immunogenicity", "dose", "platforms"],
        "marker": "booster",
    },
    {
        "key": "mask",
        "query": "coronavirus masks transmission",
        "question": "effectiveness of n95 respirators and filtration against droplet aerosol spread",
        "narrative": "Evidence on whether masks and respirators reduce transmission "
                     "in community and hospital settings.",
        "core": ["masks", "transmission"],
        "rare": ["respirators", "filtration", "droplet", "aerosol", "ppe", "fit"],
        "marker": "n95",
    },
    {
        "key": "geno",
        "query": "coronavirus genome sequencing",
        "question": "phylogenetic lineage recombination and mutation patterns from genomic surveillance",
        "narrative": "Work using whole-genome sequencing to track viral evolution "
                     "and spread.",
        "core": ["genome", "sequencing"],
        "rare": ["phylogenetic", "mutation", "lineage", "genomic", "rna", "substitutions"],
        "marker": "recombination",
    },
    {
        "key": "scho",
        "query": "coronavirus school closures",
        "question": "impact of classroom reopening truancy and distancing on students",
        "narrative": "Analyses of school closure policies and their effect on "
                     "transmission and education outcomes.",
        "core": ["school", "closures"],
        "rare": ["students", "classroom", "reopening", "distancing", "education", "absenteeism"],
        "marker": "truancy",
    },
]

JOURNALS = ["Lancet", "Nature Medicine", "JAMA", ""]
SOURCES = ["PubMed", "WHO", "medRxiv", "bioRxiv"]
AUTHORS = [
    "Chen, L.", "Garcia, M.", "Patel, R.", "Kim, S.",
    "Nguyen, T.", "Okafor, C.", "Mueller, H.", "Rossi, F.",
]
YEARS = ["2020-03-15", "2020-05-02", "2020-07-21", "2019-11-30", "2003-04-15", "2020"]


def sentence(rng, words, length, lead=None):
    chosen = [rng.choice(words) for _ in range(length)]
    if lead:
        chosen[0] = lead
    text = " ".join(chosen)
    return text[0].upper() + text[1:] + "."


def passage(rng, words, n_sentences, lead=None):
    parts = [sentence(rng, words, rng.randint(5, 9), lead=lead if i == 0 else None)
             for i in range(n_sentences)]
    return " ".join(parts)


def make_article(rng, theme, role, article_id, antibody_anchor=False):
    core, rare = theme["core"], theme["rare"]
    with_marker = False
    if role == "anchor":
        # Strongest positive: dense in both query keywords and theme terms.
        title_words = [core[0], core[1], "for", "coronavirus", rare[0]]
        vocab = core * 4 + rare * 2 + ["coronavirus"] + BACKGROUND
    elif role == "judged_pos":
        title_words = [rare[0], core[0], "in", "clinical", "practice"]
        vocab = core * 2 + rare * 3 + BACKGROUND
    elif role == "heldout_pos":
        # On-theme vocabulary without the distinctive query keywords.
        title_words = [rare[1], "and", rare[2], "findings"]
        vocab = rare * 4 + BACKGROUND * 2
    elif role == "stuffed_neg":
        # Query keywords without the theme substance.
        title_words = [core[0], core[1], "overview", "of", "reported", "cases"]
        vocab = core * 3 + BACKGROUND * 3
    else:  # plain_neg
        title_words = ["general", rng.choice(BACKGROUND), rng.choice(BACKGROUND), "report"]
        vocab = BACKGROUND * 3
    title = " ".join(title_words)
    title = title[0].upper() + title[1:]

    # Every abstract opens with a coronavirus sentence so the whole corpus is
    # reachable from "coronavirus ..." keyword queries.
    abstract = passage(rng, BACKGROUND, 1, lead="coronavirus")
    abstract += " " + passage(rng, vocab, rng.randint(2, 3))

    n_paragraphs = rng.randint(2, 3) if role != "plain_neg" else rng.choice([0, 2])
    paragraphs = [passage(rng, vocab, rng.randint(2, 5)) for _ in range(n_paragraphs)]
    if antibody_anchor:
        paragraphs.append(passage(rng, ["antibodies"] * 4 + core + rare[:2], 3))

    return {
        "id": article_id,
        "title": title,
        "abstract": abstract if role != "plain_neg" or rng.random() > 0.3 else "",
        "paragraphs": paragraphs,
        "authors": rng.sample(AUTHORS, rng.randint(1, 3)),
        "journal": rng.choice(JOURNALS),
        "source": rng.choice(SOURCES),
        "publish_time": rng.choice(YEARS),
        "url": f"https://example.org/{article_id}",
    }


ROLES = ["anchor", "judged_pos", "judged_pos", "judged_pos",
         "heldout_pos", "heldout_pos", "heldout_pos",
         "stuffed_neg", "plain_neg", "plain_neg"]

# Roles whose abstract carries the theme marker term (see module docstring).
MARKER_SLOTS = (1, 4, 5, 6)


def main():
    rng = random.Random(20200712)
    FIXTURES.mkdir(parents=True, exist_ok=True)

    articles = []
    ids_by_theme = []
    for t, theme in enumerate(THEMES, start=1):
        ids = []
        for i, role in enumerate(ROLES):
            article_id = f"{theme['key']}{i:02d}"
            article = make_article(
                rng, theme, role, article_id,
                antibody_anchor=(t == 1 and role == "anchor"),
            )
            if i in MARKER_SLOTS:
                article["abstract"] += f" {theme['marker'].capitalize()} patterns were consistent."
            articles.append(article)
            ids.append(article_id)
        ids_by_theme.append(ids)

    with open(FIXTURES / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for a in articles:
            fh.write(json.dumps(a, ensure_ascii=False) + "\n")

    with open(FIXTURES / "topics.jsonl", "w", encoding="utf-8") as fh:
        for t, theme in enumerate(THEMES, start=1):
            fh.write(json.dumps({
                "number": t,
                "query": theme["query"],
                "question": theme["question"],
                "narrative": theme["narrative"],
            }, ensure_ascii=False) + "\n")

    with open(FIXTURES / "topics.xml", "w", encoding="utf-8") as fh:
        fh.write("<topics>\n")
        for t, theme in enumerate(THEMES, start=1):
            fh.write(f'  <topic number="{t}">\n')
            fh.write(f"    <query>{theme['query']}</query>\n")
            fh.write(f"    <question>{theme['question']}</question>\n")
            fh.write(f"    <narrative>{theme['narrative']}</narrative>\n")
            fh.write("  </topic>\n")
        fh.write("</topics>\n")

    # Training qrels: judged positives 0-3 (grades 2,2,1,1), judged negatives
    # 7-9 from the same theme plus two cross-theme negatives.
    with open(FIXTURES / "qrels.txt", "w", encoding="utf-8") as fh:
        for t in range(1, 6):
            ids = ids_by_theme[t - 1]
            for i, grade in zip(range(4), (2, 2, 1, 1)):
                fh.write(f"{t} 1 {ids[i]} {grade}\n")
            for i in (7, 8, 9):
                fh.write(f"{t} 1 {ids[i]} 0\n")
            other = ids_by_theme[t % 5]
            fh.write(f"{t} 1 {other[8]} 0\n")
            fh.write(f"{t} 1 {other[9]} 0\n")

    # Held-out truth: articles 4-6 of each theme, never judged above.
    with open(FIXTURES / "qrels_heldout.txt", "w", encoding="utf-8") as fh:
        for t in range(1, 6):
            ids = ids_by_theme[t - 1]
            for i, grade in zip((4, 5, 6), (2, 1, 1)):
                fh.write(f"{t} 2 {ids[i]} {grade}\n")

    print(f"wrote fixtures for {len(articles)} articles / {len(THEMES)} topics to {FIXTURES}")


if __name__ == "__main__":
    main()
