"""Project metadata from build manifests and command-line flags."""

from __future__ import annotations

import re
import shlex
from pathlib import Path

from ..diagnostics import LanguageId
from .types import BuildTool, Dependency, ProjectMetadata

_REQ_SPLIT_RE = re.compile(r"(===|==|~=|!=|>=|<=|>|<)")
_GO_DIRECTIVE_RE = re.compile(r"^go\s+(\d[\w.]*)\s*$")
_GO_REQUIRE_RE = re.compile(r"^require\s+(\S+)\s+(\S+)")
_GO_BLOCK_ENTRY_RE = re.compile(r"^(\S+)\s+(\S+)")
_FIND_PACKAGE_RE = re.compile(r"find_package\(\s*([\w-]+)(?:\s+([\d][\w.]*))?",
                              re.IGNORECASE)


def _harvest_flags(command_line: str) -> tuple[str, ...]:
    try:
        tokens = shlex.split(command_line)
    except ValueError:
        tokens = command_line.split()
    return tuple(t for t in tokens[1:] if t.startswith("-"))


def _language_version_from_flags(flags: tuple[str, ...]) -> str | None:
    for flag in flags:
        if flag.startswith("-std="):
            return flag[len("-std="):]
    return None


def _parse_requirements(text: str) -> tuple[Dependency, ...]:
    deps = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("-"):
            continue  # blank, comment, or pip option line
        parts = _REQ_SPLIT_RE.split(line, maxsplit=1)
        name = parts[0].strip()
        spec = "".join(p.strip() for p in parts[1:]) if len(parts) > 1 else ""
        # strip extras like requests[socks]
        name = name.split("[", 1)[0].strip()
        if name:
            deps.append(Dependency(name=name, version_spec=spec))
    return tuple(deps)


def _parse_go_mod(text: str) -> tuple[tuple[Dependency, ...], str | None]:
    deps = []
    version = None
    in_block = False
    for raw in text.splitlines():
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if in_block:
            if line == ")":
                in_block = False
                continue
            m = _GO_BLOCK_ENTRY_RE.match(line)
            if m:
                deps.append(Dependency(name=m.group(1), version_spec=m.group(2)))
            continue
        if line.startswith("require ("):
            in_block = True
            continue
        m = _GO_REQUIRE_RE.match(line)
        if m:
            deps.append(Dependency(name=m.group(1), version_spec=m.group(2)))
            continue
        m = _GO_DIRECTIVE_RE.match(line)
        if m:
            version = m.group(1)
    return tuple(deps), version


def _parse_cmake(text: str) -> tuple[Dependency, ...]:
    deps = []
    for m in _FIND_PACKAGE_RE.finditer(text):
        deps.append(Dependency(name=m.group(1), version_spec=m.group(2) or ""))
    return tuple(deps)


def parse_project_metadata(project_root: str | Path, language: LanguageId,
                           command_line: str) -> ProjectMetadata:
    """Read the first matching manifest for the language plus command
    flags.  A missing manifest is not an error; it just yields empty
    dependencies."""
    root = Path(project_root)
    flags = _harvest_flags(command_line)
    lang_version = _language_version_from_flags(flags)
    deps: tuple[Dependency, ...] = ()
    tool = BuildTool.NONE

    if language is LanguageId.PYTHON:
        manifest = root / "requirements.txt"
        if manifest.is_file():
            deps = _parse_requirements(manifest.read_text(errors="replace"))
            tool = BuildTool.PIP_REQUIREMENTS
    elif language is LanguageId.GO:
        manifest = root / "go.mod"
        if manifest.is_file():
            deps, go_version = _parse_go_mod(manifest.read_text(errors="replace"))
            tool = BuildTool.GO_MOD
            if lang_version is None:
                lang_version = go_version
    else:
        cmake = root / "CMakeLists.txt"
        makefile = root / "Makefile"
        if cmake.is_file():
            deps = _parse_cmake(cmake.read_text(errors="replace"))
            tool = BuildTool.CMAKE
        elif makefile.is_file():
            tool = BuildTool.MAKE

    return ProjectMetadata(
        dependencies=deps,
        compiler_flags=flags,
        build_tool=tool,
        language_version=lang_version,
    )
