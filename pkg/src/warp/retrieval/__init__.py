"""Web-augmented retrieval: query formulation, source fan-out,
chunking, scoring, and non-redundant evidence selection."""

from .chunk import MAX_SNIPPET_CHARS, chunk_document
from .queries import formulate_queries
from .scoring import (OFFICIAL_DOC_DOMAINS, evidence_id, gather_evidence,
                      keyword_score, recency_score, reputation_score,
                      score_evidence, select_evidence_set,
                      selection_order_key, similarity_score)
from .sources import (FixtureSourceClient, GitHubIssuesClient, SourceClient,
                      StackOverflowClient, WebSearchClient, request_key,
                      search_source)
from .text import (STOPWORDS, content_tokens, cosine_similarity,
                   identifier_tokens, jaccard, rank_keywords, scoring_tokens,
                   strip_pathlike, word_ngrams)
from .types import (MAX_QUERY_CHARS, DroppedDuplicate, EvidenceSet,
                    EvidenceSnippet, QueryOrigin, RetrievalConfig,
                    ScoreComponents, ScoreWeights, SearchQuery,
                    SearchResultDoc, SourceKind)

__all__ = [
    "MAX_QUERY_CHARS",
    "MAX_SNIPPET_CHARS",
    "OFFICIAL_DOC_DOMAINS",
    "STOPWORDS",
    "DroppedDuplicate",
    "EvidenceSet",
    "EvidenceSnippet",
    "FixtureSourceClient",
    "GitHubIssuesClient",
    "QueryOrigin",
    "RetrievalConfig",
    "ScoreComponents",
    "ScoreWeights",
    "SearchQuery",
    "SearchResultDoc",
    "SourceClient",
    "SourceKind",
    "StackOverflowClient",
    "WebSearchClient",
    "chunk_document",
    "content_tokens",
    "cosine_similarity",
    "evidence_id",
    "formulate_queries",
    "gather_evidence",
    "identifier_tokens",
    "jaccard",
    "keyword_score",
    "rank_keywords",
    "recency_score",
    "reputation_score",
    "request_key",
    "score_evidence",
    "scoring_tokens",
    "search_source",
    "select_evidence_set",
    "selection_order_key",
    "similarity_score",
    "strip_pathlike",
    "word_ngrams",
]
