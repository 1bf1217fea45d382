"""Assemble the full ErrorContext for one diagnostic."""

from __future__ import annotations

from pathlib import Path

from ..diagnostics import (
    Diagnostic,
    RawCapture,
    canonicalize,
    detect_language,
    tokenize_message,
)
from .metadata import parse_project_metadata
from .types import ErrorContext, ExtractionConfig
from .window import extract_ast_window


def build_error_context(capture: RawCapture, diag: Diagnostic, source: str,
                        project_root: str | Path,
                        config: ExtractionConfig = ExtractionConfig()) -> ErrorContext:
    """Compose language detection, canonicalization, tokenization,
    window extraction, and metadata parsing.  Deterministic given its
    inputs; propagates UnknownLanguage and EmptySource."""
    language = detect_language(diag.file_path, capture.command_line)
    window = extract_ast_window(source, diag.line, config, language)
    line_count = len(source.split("\n")) - (1 if source.endswith("\n") else 0)
    clamped_line = max(1, min(diag.line, max(line_count, 1)))
    return ErrorContext(
        error_id=canonicalize(diag, language),
        message_tokens=tuple(tokenize_message(diag.message)),
        raw_message=diag.message,
        file_path=diag.file_path,
        line=clamped_line,
        language=language,
        ast_window=window,
        project_meta=parse_project_metadata(project_root, language,
                                            capture.command_line),
        capture_ref=capture.capture_id,
    )
