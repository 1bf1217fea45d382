"""Data types for code-window extraction and project metadata."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..diagnostics import CanonicalErrorId, LanguageId


@dataclass(frozen=True)
class AstWindow:
    """A source excerpt around the error line.

    `snippet` is exactly the source lines of `line_range` (inclusive,
    1-based, joined with newlines).  `degraded` marks plain-text
    fallback or forced truncation.
    """
    snippet: str
    line_range: tuple[int, int]
    enclosing_symbol: Optional[str]
    node_kinds: tuple[str, ...]
    degraded: bool

    def __post_init__(self):
        start, end = self.line_range
        if start < 1 or start > end:
            raise ValueError(f"bad line_range {self.line_range}")
        if not self.degraded and not self.node_kinds:
            raise ValueError("non-degraded window requires node kinds")

    @property
    def line_count(self) -> int:
        return self.line_range[1] - self.line_range[0] + 1

    def contains(self, line: int) -> bool:
        return self.line_range[0] <= line <= self.line_range[1]


class BuildTool(str, Enum):
    MAKE = "Make"
    CMAKE = "CMake"
    GO_MOD = "GoMod"
    PIP_REQUIREMENTS = "PipRequirements"
    NONE = "None"


@dataclass(frozen=True)
class Dependency:
    name: str
    version_spec: str  # "" when unpinned

    def __post_init__(self):
        if not self.name:
            raise ValueError("dependency name must be non-empty")


@dataclass(frozen=True)
class ProjectMetadata:
    dependencies: tuple[Dependency, ...] = ()
    compiler_flags: tuple[str, ...] = ()
    build_tool: BuildTool = BuildTool.NONE
    language_version: Optional[str] = None

    @property
    def is_empty(self) -> bool:
        return (not self.dependencies and not self.compiler_flags
                and self.build_tool is BuildTool.NONE
                and self.language_version is None)


@dataclass(frozen=True)
class ExtractionConfig:
    k: int = 10
    max_snippet_bytes: int = 4096

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_snippet_bytes < 256:
            raise ValueError("max_snippet_bytes must be >= 256")


@dataclass(frozen=True)
class ErrorContext:
    """Everything the downstream pipeline knows about one error."""
    error_id: CanonicalErrorId
    message_tokens: tuple[str, ...]
    raw_message: str
    file_path: str
    line: int
    language: LanguageId
    ast_window: AstWindow
    project_meta: ProjectMetadata
    capture_ref: str

    def __post_init__(self):
        if self.line < 1:
            raise ValueError("line must be >= 1")
        if not self.ast_window.contains(self.line):
            raise ValueError("ast window must contain the error line")
