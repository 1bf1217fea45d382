"""Code-window extraction, project metadata, and ErrorContext assembly."""

from .assemble import build_error_context
from .metadata import parse_project_metadata
from .types import (
    AstWindow,
    BuildTool,
    Dependency,
    ErrorContext,
    ExtractionConfig,
    ProjectMetadata,
)
from .window import extract_ast_window

__all__ = [
    "AstWindow",
    "BuildTool",
    "Dependency",
    "ErrorContext",
    "ExtractionConfig",
    "ProjectMetadata",
    "build_error_context",
    "extract_ast_window",
    "parse_project_metadata",
]
