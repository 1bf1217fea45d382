"""Source-language identification from file extension or build command."""

from __future__ import annotations

import shlex
from enum import Enum
from pathlib import PurePosixPath

from ..errors import UnknownLanguage


class LanguageId(str, Enum):
    C = "C"
    CPP = "Cpp"
    PYTHON = "Python"
    GO = "Go"

    @property
    def display_name(self) -> str:
        return {"C": "C", "Cpp": "C++", "Python": "Python", "Go": "Go"}[self.value]

    @property
    def query_name(self) -> str:
        """Lowercase form used in web-search queries."""
        return {"C": "c", "Cpp": "c++", "Python": "python", "Go": "go"}[self.value]


_EXTENSION_TABLE = {
    ".c": LanguageId.C,
    ".cc": LanguageId.CPP,
    ".cpp": LanguageId.CPP,
    ".cxx": LanguageId.CPP,
    ".hpp": LanguageId.CPP,
    ".py": LanguageId.PYTHON,
    ".go": LanguageId.GO,
}

_COMMAND_TABLE = [
    ("gcc", LanguageId.C),
    ("cc", LanguageId.C),
    ("clang", LanguageId.C),
    ("g++", LanguageId.CPP),
    ("c++", LanguageId.CPP),
    ("clang++", LanguageId.CPP),
    ("go", LanguageId.GO),
]


def detect_language(file_path: str, command_line: str = "") -> LanguageId:
    """Extension table first; ambiguous or missing extensions fall back to
    the command-name table.  Raises UnknownLanguage when neither matches."""
    suffix = PurePosixPath(file_path).suffix.lower()
    lang = _EXTENSION_TABLE.get(suffix)
    if lang is not None:
        return lang

    if command_line.strip():
        try:
            argv = shlex.split(command_line)
        except ValueError:
            argv = command_line.split()
        if argv:
            cmd = PurePosixPath(argv[0]).name
            if cmd.startswith("python"):
                return LanguageId.PYTHON
            for name, mapped in _COMMAND_TABLE:
                if cmd == name:
                    return mapped
    raise UnknownLanguage(f"cannot infer language for {file_path!r} (command {command_line!r})")
