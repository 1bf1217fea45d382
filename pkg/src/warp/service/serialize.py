"""JSON codecs for pipeline objects crossing the persistence and HTTP boundary.

Every ``*_to_record`` produces a dict of plain JSON types; the matching
``parse_*`` inverts it exactly.  Diffs travel as unified-diff text so
records stay readable in the event log.
"""

from __future__ import annotations

from typing import Any, Mapping, Optional

from ..context import (
    AstWindow,
    BuildTool,
    Dependency,
    ErrorContext,
    ProjectMetadata,
)
from ..diagnostics import CanonicalErrorId, LanguageId
from ..diffs import format_diff, parse_unified_diff
from ..retrieval import (
    DroppedDuplicate,
    EvidenceSet,
    EvidenceSnippet,
    ScoreComponents,
    SourceKind,
)
from ..synthesis import FinalSolution, Provenance

__all__ = [
    "context_to_record",
    "evidence_to_record",
    "parse_context",
    "parse_evidence",
    "parse_snippet",
    "parse_solution",
    "snippet_to_record",
    "solution_to_record",
]


def solution_to_record(solution: FinalSolution) -> dict[str, Any]:
    return {
        "fix": format_diff(solution.fix),
        "explanation": solution.explanation,
        "citations": list(solution.citations),
        "confidence": solution.confidence,
        "rank": solution.rank,
        "provenance": solution.provenance.value,
    }


def parse_solution(record: Mapping[str, Any]) -> FinalSolution:
    return FinalSolution(
        fix=parse_unified_diff(record["fix"]),
        explanation=record["explanation"],
        citations=tuple(record["citations"]),
        confidence=record["confidence"],
        rank=record["rank"],
        provenance=Provenance(record["provenance"]),
    )


def snippet_to_record(snippet: EvidenceSnippet) -> dict[str, Any]:
    components = snippet.components
    return {
        "id": snippet.id,
        "text": snippet.text,
        "url": snippet.url,
        "source": snippet.source.value,
        "published_at": snippet.published_at,
        "components": {
            "similarity": components.similarity,
            "keyword": components.keyword,
            "reputation": components.reputation,
            "recency": components.recency,
        },
        "score": snippet.score,
    }


def parse_snippet(record: Mapping[str, Any]) -> EvidenceSnippet:
    return EvidenceSnippet(
        id=record["id"],
        text=record["text"],
        url=record["url"],
        source=SourceKind(record["source"]),
        published_at=record["published_at"],
        components=ScoreComponents(**record["components"]),
        score=record["score"],
    )


def evidence_to_record(evidence: EvidenceSet) -> dict[str, Any]:
    return {
        "snippets": [snippet_to_record(s) for s in evidence.snippets],
        "selection_log": [
            {"dropped_id": d.dropped_id, "kept_id": d.kept_id, "jaccard": d.jaccard}
            for d in evidence.selection_log
        ],
    }


def parse_evidence(record: Mapping[str, Any]) -> EvidenceSet:
    return EvidenceSet(
        snippets=tuple(parse_snippet(s) for s in record["snippets"]),
        selection_log=tuple(
            DroppedDuplicate(**d) for d in record["selection_log"]
        ),
    )


def context_to_record(context: ErrorContext) -> dict[str, Any]:
    meta = context.project_meta
    return {
        "error_id": context.error_id.id,
        "taxonomy_version": context.error_id.taxonomy_version,
        "message_tokens": list(context.message_tokens),
        "raw_message": context.raw_message,
        "file_path": context.file_path,
        "line": context.line,
        "language": context.language.value,
        "ast_window": {
            "snippet": context.ast_window.snippet,
            "line_range": list(context.ast_window.line_range),
            "enclosing_symbol": context.ast_window.enclosing_symbol,
            "node_kinds": list(context.ast_window.node_kinds),
            "degraded": context.ast_window.degraded,
        },
        "project_meta": {
            "dependencies": [
                {"name": d.name, "version_spec": d.version_spec}
                for d in meta.dependencies
            ],
            "compiler_flags": list(meta.compiler_flags),
            "build_tool": meta.build_tool.value,
            "language_version": meta.language_version,
        },
        "capture_ref": context.capture_ref,
    }


def parse_context(record: Mapping[str, Any]) -> ErrorContext:
    window = record["ast_window"]
    meta = record["project_meta"]
    return ErrorContext(
        error_id=CanonicalErrorId(
            id=record["error_id"],
            taxonomy_version=record["taxonomy_version"],
        ),
        message_tokens=tuple(record["message_tokens"]),
        raw_message=record["raw_message"],
        file_path=record["file_path"],
        line=record["line"],
        language=LanguageId(record["language"]),
        ast_window=AstWindow(
            snippet=window["snippet"],
            line_range=tuple(window["line_range"]),
            enclosing_symbol=window["enclosing_symbol"],
            node_kinds=tuple(window["node_kinds"]),
            degraded=window["degraded"],
        ),
        project_meta=ProjectMetadata(
            dependencies=tuple(
                Dependency(**d) for d in meta["dependencies"]
            ),
            compiler_flags=tuple(meta["compiler_flags"]),
            build_tool=BuildTool(meta["build_tool"]),
            language_version=meta["language_version"],
        ),
        capture_ref=record["capture_ref"],
    )
