"""Compiler-output capture, parsing, tokenization, and error canonicalization."""

from .capture import RawCapture, capture_command
from .language import LanguageId, detect_language
from .parse import (
    Diagnostic,
    RawSpan,
    ScanResult,
    Severity,
    Tool,
    detect_tool,
    first_error,
    parse_diagnostics,
    scan_streams,
    should_trigger_repair,
)
from .taxonomy import TAXONOMY_VERSION, CanonicalErrorId, canonicalize, shipped_ids
from .tokenize import tokenize_message

__all__ = [
    "RawCapture",
    "capture_command",
    "LanguageId",
    "detect_language",
    "Diagnostic",
    "RawSpan",
    "ScanResult",
    "Severity",
    "Tool",
    "detect_tool",
    "first_error",
    "parse_diagnostics",
    "scan_streams",
    "should_trigger_repair",
    "TAXONOMY_VERSION",
    "CanonicalErrorId",
    "canonicalize",
    "shipped_ids",
    "tokenize_message",
]
