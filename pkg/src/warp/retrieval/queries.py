"""Search query formulation from the error context."""

from __future__ import annotations

import re
from typing import Optional

from ..context import ErrorContext
from ..hypothesis import Hypothesis
from .text import rank_keywords, scoring_tokens, strip_pathlike
from .types import (
    MAX_QUERY_CHARS,
    QueryOrigin,
    RetrievalConfig,
    SearchQuery,
    SourceKind,
)

_VERSION_OPERATOR_RE = re.compile(r"^(===|==|~=|!=|>=|<=|>|<)\s*")

# Digit-led tokens (versions) are invisible to the identifier
# tokenizer but must still distinguish queries.
_VERSIONISH_RE = re.compile(r"\b\d[\w.+-]*")


def _clip(text: str) -> str:
    if len(text) <= MAX_QUERY_CHARS:
        return text
    clipped = text[:MAX_QUERY_CHARS]
    if " " in clipped:
        clipped = clipped.rsplit(" ", 1)[0]
    return clipped


def _message_without_paths(ctx: ErrorContext) -> str:
    kept = strip_pathlike(ctx.raw_message.split())
    return " ".join(kept) if kept else ctx.raw_message


def _plain_version(spec: str) -> str:
    version = _VERSION_OPERATOR_RE.sub("", spec.strip())
    if re.fullmatch(r"v\d[\w.+-]*", version):
        version = version[1:]
    return version


def _term_set(text: str) -> frozenset[str]:
    terms = set(scoring_tokens(text))
    terms.update(m.group(0) for m in _VERSIONISH_RE.finditer(text.lower()))
    return frozenset(terms)


def formulate_queries(ctx: ErrorContext, hypo: Optional[Hypothesis],
                      config: RetrievalConfig = RetrievalConfig()) -> list[SearchQuery]:
    """Up to N queries in priority order; duplicates (by term set)
    dropped keeping the earlier rule."""
    lang = ctx.language.query_name
    candidates: list[SearchQuery] = []

    candidates.append(SearchQuery(
        text=_clip(f"{lang} {_message_without_paths(ctx)}"),
        target=SourceKind.STACK_OVERFLOW,
        origin=frozenset({QueryOrigin.MESSAGE}),
    ))

    id_words = ctx.error_id.id.split("_", 1)[-1].replace("_", " ").lower()
    candidates.append(SearchQuery(
        text=_clip(f"{lang} {id_words}"),
        target=SourceKind.WEB_SEARCH,
        origin=frozenset({QueryOrigin.ERROR_ID}),
    ))

    if ctx.project_meta.dependencies:
        top = ctx.project_meta.dependencies[0]
        library = top.name.rsplit("/", 1)[-1]
        version = _plain_version(top.version_spec)
        suffix = f"{library} {version}".strip()
        candidates.append(SearchQuery(
            text=_clip(f"{lang} {_message_without_paths(ctx)} {suffix}"),
            target=SourceKind.GITHUB_ISSUES,
            origin=frozenset({QueryOrigin.MESSAGE, QueryOrigin.METADATA_VERSION}),
        ))

    if hypo is not None:
        keywords = rank_keywords(hypo.explanation, top_n=3)
        if keywords:
            candidates.append(SearchQuery(
                text=_clip(f"{lang} {' '.join(keywords)}"),
                target=SourceKind.WEB_SEARCH,
                origin=frozenset({QueryOrigin.HYPOTHESIS_KEYWORDS}),
            ))

    queries: list[SearchQuery] = []
    seen_terms: list[frozenset[str]] = []
    for query in candidates:
        terms = _term_set(query.text)
        if any(terms == earlier for earlier in seen_terms):
            continue
        queries.append(query)
        seen_terms.append(terms)
        if len(queries) == config.n_queries:
            break
    return queries
