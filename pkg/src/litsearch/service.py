"""Interactive search backend: multi-stage pipeline, facets, highlighting.

The default preset mirrors the deployed configuration: paragraph-index BM25,
max-aggregation to articles, then a pointwise rerank of the top 96. An
``abstract`` preset searches the abstract index instead. Facet filters are
applied after ranking and facet counts reflect the unfiltered top 500, so
the sidebar always describes the result set the user is narrowing.

If the scorer fails, the response falls back to the first-stage ordering of
the same candidates and is flagged ``degraded``.

HTTP surface (all JSON):

    GET /api/search?query=...&year_from=&year_to=&journal=&source=&author=
                   &page=&page_size=&preset=
    GET /api/article/{id}
    GET /healthz

Errors use bodies of the form {"error": str}.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .corpus import Article, split_sentences
from .errors import ScorerError
from .fusion import max_aggregate
from .index import InvertedIndex, search, tokenize
from .ranking import RankedList
from .rerank import DEFAULT_MAX_TOKENS, DEFAULT_RERANK_DEPTH, pointwise_rerank
from .scorer import ReferenceScorer, Scorer

FACET_DEPTH = 500
CANDIDATE_DEPTH = 1000
PRESETS = ("paragraph", "abstract")
PAGE_SIZE_DEFAULT = 10
PAGE_SIZE_MAX = 50
HIGHLIGHT_COUNT = 3


class BadRequest(ValueError):
    pass


class NotFound(KeyError):
    pass


@dataclass
class SearchRequest:
    query: str
    year_from: int | None = None
    year_to: int | None = None
    journals: list[str] = field(default_factory=list)
    sources: list[str] = field(default_factory=list)
    authors: list[str] = field(default_factory=list)
    page: int = 1
    page_size: int = PAGE_SIZE_DEFAULT
    preset: str = "paragraph"

    def validate(self) -> None:
        if not self.query.strip():
            raise BadRequest("query must not be empty")
        if self.preset not in PRESETS:
            raise BadRequest(f"unknown preset {self.preset!r}; expected one of {PRESETS}")
        if self.page < 1:
            raise BadRequest("page must be >= 1")
        if not 1 <= self.page_size <= PAGE_SIZE_MAX:
            raise BadRequest(f"page_size must be between 1 and {PAGE_SIZE_MAX}")


def publish_year(article: Article) -> str:
    prefix = article.publish_time[:4]
    return prefix if prefix.isdigit() else "unknown"


def highlight(
    query: str, article: Article, m: int = HIGHLIGHT_COUNT, idf: Mapping[str, float] | None = None
) -> list[dict]:
    """Top-m sentences by idf-weighted query-term coverage, in score order.

    Sentences come from the abstract (paragraph_index null) and the body
    paragraphs; ties keep document order; zero-score sentences are dropped.
    """
    idf = idf or {}
    query_terms = set(tokenize(query))
    if not query_terms:
        return []
    scored = []
    sections: list[tuple[int | None, str]] = [(None, article.abstract)]
    sections.extend((i, p) for i, p in enumerate(article.paragraphs))
    for paragraph_index, section_text in sections:
        for sentence_index, sentence in enumerate(split_sentences(section_text)):
            terms = set(tokenize(sentence))
            score = sum(idf.get(t, 1.0) for t in query_terms & terms)
            if score > 0.0:
                scored.append((score, paragraph_index, sentence_index, sentence))
    scored.sort(key=lambda item: -item[0])
    return [
        {"paragraph_index": p, "sentence_index": s, "text": text}
        for _, p, s, text in scored[:m]
    ]


def facet_counts(articles: list[Article]) -> dict[str, dict[str, int]]:
    """Value counts for the dates, authors, journals, and sources facets."""
    counts: dict[str, dict[str, int]] = {"dates": {}, "authors": {}, "journals": {}, "sources": {}}

    def bump(facet: str, value: str) -> None:
        counts[facet][value] = counts[facet].get(value, 0) + 1

    for article in articles:
        bump("dates", publish_year(article))
        bump("journals", article.journal or "unknown")
        bump("sources", article.source or "unknown")
        if article.authors:
            for author in article.authors:
                bump("authors", author)
        else:
            bump("authors", "unknown")
    return counts


class SearchEngine:
    """Shared immutable state behind the HTTP handlers."""

    def __init__(
        self,
        articles: dict[str, Article],
        indexes: dict[str, InvertedIndex],
        scorer: Scorer | None = None,
        rerank_depth: int = DEFAULT_RERANK_DEPTH,
        max_tokens: int = DEFAULT_MAX_TOKENS,
        corpus_version: str = "unversioned",
    ):
        self.articles = articles
        self.indexes = indexes
        self.rerank_depth = rerank_depth
        self.max_tokens = max_tokens
        self.corpus_version = corpus_version
        abstract_idx = indexes.get("abstract")
        self.idf = abstract_idx.idf_table() if abstract_idx else {}
        self.scorer = scorer if scorer is not None else ReferenceScorer(idf=self.idf)
        self.doc_texts = {
            article_id: " ".join(filter(None, [a.title, a.abstract, *a.paragraphs]))
            for article_id, a in articles.items()
        }
        # Indexes are immutable, so the unfiltered pipeline is a pure function
        # of (query, preset) and safe to memoize across concurrent requests.
        self._pipeline_cache: dict[tuple[str, str], tuple[RankedList, bool]] = {}
        self._cache_lock = threading.Lock()
        self._cache_limit = 128

    def first_stage(self, query: str, preset: str) -> RankedList:
        """BM25 candidates at article level, truncated to the facet depth."""
        if preset == "paragraph":
            hits = search(self.indexes["paragraph"], query, CANDIDATE_DEPTH)
            hits = max_aggregate(hits)
        else:
            hits = search(self.indexes["abstract"], query, FACET_DEPTH)
        return hits.truncated(FACET_DEPTH)

    def ranked_candidates(self, query: str, preset: str) -> tuple[RankedList, bool]:
        """Full unfiltered ranking and whether the scorer path degraded.

        Degraded results are not cached, so a recovered scorer is picked up
        by the next request.
        """
        key = (query, preset)
        with self._cache_lock:
            cached = self._pipeline_cache.get(key)
        if cached is not None:
            return cached
        candidates = self.first_stage(query, preset)
        if not candidates.entries:
            result = (candidates, False)
        else:
            try:
                ranked = pointwise_rerank(
                    self.scorer, query, candidates, self.doc_texts,
                    depth=self.rerank_depth, max_tokens=self.max_tokens,
                )
                result = (ranked, False)
            except ScorerError:
                return candidates, True
        with self._cache_lock:
            if len(self._pipeline_cache) >= self._cache_limit:
                self._pipeline_cache.clear()
            self._pipeline_cache[key] = result
        return result

    def handle_search(self, req: SearchRequest) -> dict:
        req.validate()
        ranked, degraded = self.ranked_candidates(req.query, req.preset)
        articles = [self.articles[e.doc_id] for e in ranked.entries]
        facets = facet_counts(articles)

        filtered = [
            (entry, article)
            for entry, article in zip(ranked.entries, articles)
            if self._matches(article, req)
        ]
        total = len(filtered)
        start = (req.page - 1) * req.page_size
        page_items = filtered[start : start + req.page_size]
        results = []
        for entry, article in page_items:
            results.append(
                {
                    "article_id": article.article_id,
                    "title": article.title,
                    "abstract": article.abstract,
                    "url": article.url,
                    "journal": article.journal,
                    "source": article.source,
                    "authors": list(article.authors),
                    "publish_time": article.publish_time,
                    "score": entry.score,
                    "highlights": highlight(req.query, article, idf=self.idf),
                }
            )
        return {
            "query": req.query,
            "preset": req.preset,
            "page": req.page,
            "page_size": req.page_size,
            "total": total,
            "degraded": degraded,
            "results": results,
            "facet_counts": facets,
        }

    def _matches(self, article: Article, req: SearchRequest) -> bool:
        if req.year_from is not None or req.year_to is not None:
            year = publish_year(article)
            if not year.isdigit():
                return False
            y = int(year)
            if req.year_from is not None and y < req.year_from:
                return False
            if req.year_to is not None and y > req.year_to:
                return False
        if req.journals and article.journal not in req.journals:
            return False
        if req.sources and article.source not in req.sources:
            return False
        if req.authors and not set(req.authors) & set(article.authors):
            return False
        return True

    def get_article(self, article_id: str) -> Article:
        try:
            return self.articles[article_id]
        except KeyError:
            raise NotFound(f"unknown article {article_id!r}") from None


def create_app(engine: SearchEngine, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="litsearch", version=__version__)

    @app.exception_handler(BadRequest)
    async def bad_request_handler(request: Request, exc: BadRequest):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(NotFound)
    async def not_found_handler(request: Request, exc: NotFound):
        return JSONResponse(status_code=404, content={"error": str(exc.args[0])})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/api/search")
    def api_search(
        query: str = "",
        year_from: int | None = None,
        year_to: int | None = None,
        journal: list[str] = Query(default=[]),
        source: list[str] = Query(default=[]),
        author: list[str] = Query(default=[]),
        page: int = 1,
        page_size: int = PAGE_SIZE_DEFAULT,
        preset: str = "paragraph",
    ):
        req = SearchRequest(
            query=query,
            year_from=year_from,
            year_to=year_to,
            journals=journal,
            sources=source,
            authors=author,
            page=page,
            page_size=page_size,
            preset=preset,
        )
        return engine.handle_search(req)

    @app.get("/api/article/{article_id}")
    def api_article(article_id: str):
        a = engine.get_article(article_id)
        return {
            "article_id": a.article_id,
            "title": a.title,
            "abstract": a.abstract,
            "paragraphs": list(a.paragraphs),
            "authors": list(a.authors),
            "journal": a.journal,
            "source": a.source,
            "publish_time": a.publish_time,
            "url": a.url,
        }

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "version": __version__,
            "corpus_version": engine.corpus_version,
            "articles": len(engine.articles),
            "granularities": sorted(engine.indexes),
        }

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
