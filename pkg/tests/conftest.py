"""Shared fixtures and corpus loading helpers."""

from __future__ import annotations

import json
from pathlib import Path

from warp.diagnostics import LanguageId, RawCapture

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"

# Longest prefixes first so clang-cpp does not fall into the clang-c bucket.
_PREFIX_LANGUAGES = [
    ("clang-cpp", LanguageId.CPP),
    ("gpp-cpp", LanguageId.CPP),
    ("clang-c", LanguageId.C),
    ("gcc-c", LanguageId.C),
    ("py", LanguageId.PYTHON),
    ("go", LanguageId.GO),
]


def corpus_case_dirs() -> list[Path]:
    return sorted(p for p in CORPUS.iterdir() if p.is_dir())


def corpus_language(case_name: str) -> LanguageId:
    for prefix, lang in _PREFIX_LANGUAGES:
        if case_name.startswith(prefix):
            return lang
    raise AssertionError(f"unmapped corpus case {case_name}")


def load_corpus_case(case_dir: Path) -> tuple[RawCapture, dict]:
    """Rebuild the RawCapture from recorded files plus its hand label."""
    meta = json.loads((case_dir / "meta.json").read_text())
    capture = RawCapture(
        command_line=(case_dir / "cmd.txt").read_text().strip(),
        exit_code=meta["exit_code"],
        stdout=(case_dir / "stdout.txt").read_bytes().decode("utf-8", "surrogateescape"),
        stderr=(case_dir / "stderr.txt").read_bytes().decode("utf-8", "surrogateescape"),
        started_at=0,
        finished_at=0,
        working_dir=str(case_dir),
        timed_out=meta["timed_out"],
    )
    expected = json.loads((case_dir / "expected.json").read_text())
    return capture, expected
