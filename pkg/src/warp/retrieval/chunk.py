"""Document chunking: split retrieved bodies into candidate snippets.

Fenced code blocks are atomic and never split, even when over-length.
Prose is split at section boundaries and blank lines, then greedily
packed back up to the snippet budget so adjacent short paragraphs
travel together.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .types import SearchResultDoc

MAX_SNIPPET_CHARS = 1200

_FENCE_RE = re.compile(r"^(```|~~~)")
_HEADING_RE = re.compile(r"^#{1,6}\s+\S")
_RULE_RE = re.compile(r"^(?:-{3,}|={3,}|\*{3,})\s*$")


@dataclass(frozen=True)
class _Piece:
    text: str
    atomic: bool


def _segment(body: str) -> list[_Piece]:
    """Separate fenced code blocks (atomic) from prose runs."""
    pieces: list[_Piece] = []
    prose: list[str] = []
    lines = body.splitlines()
    i = 0

    def flush_prose() -> None:
        if prose:
            pieces.append(_Piece("\n".join(prose), atomic=False))
            prose.clear()

    while i < len(lines):
        fence = _FENCE_RE.match(lines[i])
        if fence:
            flush_prose()
            marker = fence.group(1)
            block = [lines[i]]
            i += 1
            while i < len(lines):
                block.append(lines[i])
                if lines[i].startswith(marker):
                    i += 1
                    break
                i += 1
            pieces.append(_Piece("\n".join(block), atomic=True))
            continue
        prose.append(lines[i])
        i += 1
    flush_prose()
    return pieces


def _split_prose(text: str) -> list[str]:
    """Section boundaries first, then blank-line paragraphs."""
    paragraphs: list[str] = []
    current: list[str] = []

    def flush() -> None:
        chunk = "\n".join(current).strip()
        if chunk:
            paragraphs.append(chunk)
        current.clear()

    for line in text.splitlines():
        if _RULE_RE.match(line):
            flush()
            continue
        if _HEADING_RE.match(line):
            flush()
            paragraphs.append(line.strip())
            continue
        if not line.strip():
            flush()
            continue
        current.append(line)
    flush()
    return paragraphs


def _split_long(paragraph: str) -> list[str]:
    """Cut an over-length paragraph at the last whitespace under budget."""
    parts: list[str] = []
    rest = paragraph
    while len(rest) > MAX_SNIPPET_CHARS:
        window = rest[: MAX_SNIPPET_CHARS + 1]
        cut = max(window.rfind(" "), window.rfind("\n"), window.rfind("\t"))
        if cut <= 0:
            cut = MAX_SNIPPET_CHARS
        parts.append(rest[:cut].rstrip())
        rest = rest[cut:].lstrip()
    if rest:
        parts.append(rest)
    return parts


def chunk_document(doc: SearchResultDoc) -> list[str]:
    """Split one document body into ordered snippet texts.

    Empty or whitespace-only bodies yield no snippets.
    """
    if not doc.body.strip():
        return []

    units: list[_Piece] = []
    for piece in _segment(doc.body):
        if piece.atomic:
            units.append(piece)
            continue
        for paragraph in _split_prose(piece.text):
            for part in _split_long(paragraph):
                units.append(_Piece(part, atomic=False))

    snippets: list[str] = []
    pack: list[str] = []
    pack_len = 0

    for unit in units:
        joined = pack_len + (2 if pack else 0) + len(unit.text)
        if pack and joined <= MAX_SNIPPET_CHARS:
            pack.append(unit.text)
            pack_len = joined
            continue
        if pack:
            snippets.append("\n\n".join(pack))
        pack = [unit.text]
        pack_len = len(unit.text)
    if pack:
        snippets.append("\n\n".join(pack))
    return snippets
