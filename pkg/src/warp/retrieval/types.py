"""Data types for query formulation, search, and evidence ranking."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional


class SourceKind(str, Enum):
    STACK_OVERFLOW = "StackOverflow"
    GITHUB_ISSUES = "GitHubIssues"
    WEB_SEARCH = "WebSearch"


class QueryOrigin(str, Enum):
    MESSAGE = "message"
    ERROR_ID = "error_id"
    HYPOTHESIS_KEYWORDS = "hypothesis_keywords"
    METADATA_VERSION = "metadata_version"


MAX_QUERY_CHARS = 256


@dataclass(frozen=True)
class SearchQuery:
    text: str
    target: SourceKind
    origin: frozenset[QueryOrigin]

    def __post_init__(self):
        if not self.text or len(self.text) > MAX_QUERY_CHARS:
            raise ValueError("query text must be non-empty and <= 256 chars")
        if not self.origin:
            raise ValueError("query origin must be non-empty")


@dataclass(frozen=True)
class SearchResultDoc:
    url: str
    title: str
    body: str
    source: SourceKind
    published_at: Optional[int] = None  # epoch milliseconds
    source_signals: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ScoreComponents:
    similarity: float
    keyword: float
    reputation: float
    recency: float

    def __post_init__(self):
        for name in ("similarity", "keyword", "reputation", "recency"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"component {name}={value} out of [0,1]")


@dataclass(frozen=True)
class EvidenceSnippet:
    id: str
    text: str
    url: str
    source: SourceKind
    published_at: Optional[int]
    components: ScoreComponents
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError("score out of [0,1]")


@dataclass(frozen=True)
class DroppedDuplicate:
    dropped_id: str
    kept_id: str
    jaccard: float


@dataclass(frozen=True)
class EvidenceSet:
    snippets: tuple[EvidenceSnippet, ...]
    selection_log: tuple[DroppedDuplicate, ...] = ()

    def __post_init__(self):
        scores = [s.score for s in self.snippets]
        if scores != sorted(scores, reverse=True):
            raise ValueError("snippets must be ordered by descending score")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.snippets)

    def by_id(self, snippet_id: str) -> Optional[EvidenceSnippet]:
        for snippet in self.snippets:
            if snippet.id == snippet_id:
                return snippet
        return None


@dataclass(frozen=True)
class ScoreWeights:
    similarity: float = 0.45
    keyword: float = 0.20
    reputation: float = 0.20
    recency: float = 0.15

    def __post_init__(self):
        values = (self.similarity, self.keyword, self.reputation, self.recency)
        if any(w < 0 for w in values):
            raise ValueError("weights must be nonnegative")
        if abs(sum(values) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


@dataclass(frozen=True)
class RetrievalConfig:
    n_queries: int = 4
    k_docs: int = 5
    m_prime: int = 8
    weights: ScoreWeights = ScoreWeights()
    recency_half_life_days: float = 730.0
    dedup_jaccard: float = 0.8
    per_source_timeout: float = 2.0
    # Fixed scoring clock (epoch ms) for reproducible recency; None
    # means "now".
    reference_time: Optional[int] = None

    def __post_init__(self):
        if min(self.n_queries, self.k_docs, self.m_prime) < 1:
            raise ValueError("N, K, M' must each be >= 1")
