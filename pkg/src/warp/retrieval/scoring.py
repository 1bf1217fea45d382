"""Evidence scoring and non-redundant selection.

Each snippet gets four components in [0,1] (lexical similarity to the
error context, keyword overlap with the message, source reputation,
recency) combined as a weighted sum, then the top M' mutually
non-redundant snippets are kept.
"""

from __future__ import annotations

import hashlib
import time
from typing import Iterable, Optional
from urllib.parse import urlparse

from ..context import ErrorContext
from .chunk import chunk_document
from .text import (content_tokens, cosine_similarity, identifier_tokens,
                   jaccard, scoring_tokens, word_ngrams)
from .types import (DroppedDuplicate, EvidenceSet, EvidenceSnippet,
                    RetrievalConfig, ScoreComponents, SearchResultDoc,
                    SourceKind)

MS_PER_DAY = 86_400_000.0

# Hosts treated as official documentation, reputation 1.0 regardless of
# which source surfaced them.
OFFICIAL_DOC_DOMAINS = frozenset({
    "docs.python.org",
    "peps.python.org",
    "golang.org",
    "go.dev",
    "pkg.go.dev",
    "gcc.gnu.org",
    "clang.llvm.org",
    "llvm.org",
    "en.cppreference.com",
    "cppreference.com",
    "isocpp.org",
    "man7.org",
})

_SOURCE_REPUTATION = {
    SourceKind.GITHUB_ISSUES: 0.8,
    SourceKind.WEB_SEARCH: 0.5,
}


def _is_official(url: str) -> bool:
    host = (urlparse(url).hostname or "").lower()
    return any(host == d or host.endswith("." + d) for d in OFFICIAL_DOC_DOMAINS)


def reputation_score(doc: SearchResultDoc) -> float:
    if _is_official(doc.url):
        return 1.0
    if doc.source is SourceKind.STACK_OVERFLOW:
        accepted = float(doc.source_signals.get("accepted", 0.0)) >= 1.0
        return 0.9 if accepted else 0.7
    return _SOURCE_REPUTATION[doc.source]


def recency_score(published_at: Optional[int], half_life_days: float,
                  reference_time: Optional[int]) -> float:
    if published_at is None:
        return 0.5
    now_ms = reference_time if reference_time is not None else time.time() * 1000
    age_days = max(0.0, (now_ms - published_at) / MS_PER_DAY)
    return 2.0 ** (-age_days / half_life_days)


def similarity_score(snippet_text: str, ctx: ErrorContext) -> float:
    context_text = " ".join(
        [ctx.raw_message] + identifier_tokens(ctx.ast_window.snippet))
    return cosine_similarity(content_tokens(snippet_text),
                             content_tokens(context_text))


def keyword_score(snippet_text: str, ctx: ErrorContext) -> float:
    message_words: set[str] = set()
    for token in ctx.message_tokens:
        message_words.update(scoring_tokens(token))
    if not message_words:
        return 0.0
    snippet_words = set(scoring_tokens(snippet_text))
    return len(message_words & snippet_words) / len(message_words)


def evidence_id(url: str, text: str) -> str:
    digest = hashlib.sha256(f"{url}\n{text}".encode()).hexdigest()
    return f"ev-{digest[:12]}"


def score_evidence(snippet_text: str, ctx: ErrorContext, doc: SearchResultDoc,
                   config: RetrievalConfig = RetrievalConfig()) -> EvidenceSnippet:
    components = ScoreComponents(
        similarity=similarity_score(snippet_text, ctx),
        keyword=keyword_score(snippet_text, ctx),
        reputation=reputation_score(doc),
        recency=recency_score(doc.published_at, config.recency_half_life_days,
                              config.reference_time),
    )
    w = config.weights
    score = (w.similarity * components.similarity
             + w.keyword * components.keyword
             + w.reputation * components.reputation
             + w.recency * components.recency)
    return EvidenceSnippet(
        id=evidence_id(doc.url, snippet_text),
        text=snippet_text,
        url=doc.url,
        source=doc.source,
        published_at=doc.published_at,
        components=components,
        score=score,
    )


def selection_order_key(snippet: EvidenceSnippet):
    """Total order for selection: score desc, newer first (undated
    last), then url and text as deterministic tie-breakers."""
    published = snippet.published_at if snippet.published_at is not None else float("-inf")
    return (-snippet.score, -published, snippet.url, snippet.text)


def select_evidence_set(candidates: Iterable[EvidenceSnippet],
                        config: RetrievalConfig = RetrievalConfig()) -> EvidenceSet:
    ordered = sorted(candidates, key=selection_order_key)
    admitted: list[EvidenceSnippet] = []
    admitted_grams: list[frozenset] = []
    dropped: list[DroppedDuplicate] = []
    for candidate in ordered:
        if len(admitted) == config.m_prime:
            break
        grams = word_ngrams(candidate.text)
        duplicate_of = None
        worst = 0.0
        for keeper, keeper_grams in zip(admitted, admitted_grams):
            overlap = jaccard(grams, keeper_grams)
            if overlap >= config.dedup_jaccard:
                duplicate_of, worst = keeper, overlap
                break
        if duplicate_of is not None:
            dropped.append(DroppedDuplicate(
                dropped_id=candidate.id, kept_id=duplicate_of.id, jaccard=worst))
            continue
        admitted.append(candidate)
        admitted_grams.append(grams)
    return EvidenceSet(snippets=tuple(admitted), selection_log=tuple(dropped))


def gather_evidence(ctx: ErrorContext, docs: Iterable[SearchResultDoc],
                    config: RetrievalConfig = RetrievalConfig()) -> EvidenceSet:
    """Chunk, score, and select over a combined document list.  Repeat
    urls (the same doc found by several queries) are scored once."""
    seen_urls: set[str] = set()
    candidates: list[EvidenceSnippet] = []
    for doc in docs:
        if doc.url in seen_urls:
            continue
        seen_urls.add(doc.url)
        for snippet_text in chunk_document(doc):
            candidates.append(score_evidence(snippet_text, ctx, doc, config))
    return select_evidence_set(candidates, config)
