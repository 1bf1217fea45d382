"""Extract a structured source window around an error line.

Python sources go through the stdlib `ast` parser.  C, C++, and Go go
through a lightweight block scanner that pairs braces and parentheses
while respecting comments, string/char literals (including Go raw
strings), and line continuations.  Either way the window is the
smaller of the enclosing function and the plain ±k line window, and a
parse failure falls back to plain text flagged as degraded.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from typing import Optional

from ..diagnostics import LanguageId
from ..errors import EmptySource
from .types import AstWindow, ExtractionConfig

_C_CONTROL_KEYWORDS = {"if", "for", "while", "switch", "catch", "do", "else"}
_GO_FUNC_NAME_RE = re.compile(r"\bfunc\s+(?:\([^)]*\)\s+)?([A-Za-z_]\w*)\s*\(")
_CPP_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_:~")


@dataclass(frozen=True)
class _FunctionExtent:
    start_line: int
    end_line: int
    name: Optional[str]

    def contains(self, line: int) -> bool:
        return self.start_line <= line <= self.end_line

    @property
    def line_count(self) -> int:
        return self.end_line - self.start_line + 1


def _split_lines(source: str) -> list[str]:
    lines = source.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline is not an extra source line
    return lines


def _snippet(lines: list[str], start: int, end: int) -> str:
    return "\n".join(lines[start - 1:end])


def _byte_len(text: str) -> int:
    return len(text.encode("utf-8", "surrogateescape"))


# ------------------------------------------------------------- Python


def _python_parse(source: str, line: int):
    """(innermost enclosing function extent, statement kinds near line)."""
    tree = ast.parse(source)
    enclosing: Optional[_FunctionExtent] = None
    kinds_by_line: list[tuple[int, int, str]] = []
    func_types = (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda)
    for node in ast.walk(tree):
        start = getattr(node, "lineno", None)
        end = getattr(node, "end_lineno", None)
        if start is None or end is None:
            continue
        if isinstance(node, ast.stmt):
            kinds_by_line.append((start, end, type(node).__name__))
        if isinstance(node, func_types) and start <= line <= end:
            name = getattr(node, "name", None)
            if enclosing is None or (end - start) < enclosing.line_count - 1:
                enclosing = _FunctionExtent(start, end, name)
    return enclosing, kinds_by_line


# ------------------------------------------------------- C / C++ / Go


def _scan_pairs(source: str, language: LanguageId):
    """Offsets of matched brace pairs and a paren-match map.

    Raises ValueError on unbalanced braces (treated as parse failure).
    """
    brace_pairs: list[tuple[int, int]] = []
    paren_match: dict[int, int] = {}
    brace_stack: list[int] = []
    paren_stack: list[int] = []
    i, n = 0, len(source)
    raw_strings = language is LanguageId.GO
    while i < n:
        ch = source[i]
        nxt = source[i + 1] if i + 1 < n else ""
        if ch == "/" and nxt == "/":
            j = source.find("\n", i)
            i = n if j < 0 else j
            continue
        if ch == "/" and nxt == "*":
            j = source.find("*/", i + 2)
            i = n if j < 0 else j + 2
            continue
        if ch in "\"'":
            quote = ch
            i += 1
            while i < n and source[i] != quote:
                i += 2 if source[i] == "\\" else 1
            i += 1
            continue
        if raw_strings and ch == "`":
            j = source.find("`", i + 1)
            i = n if j < 0 else j + 1
            continue
        if ch == "{":
            brace_stack.append(i)
        elif ch == "}":
            if not brace_stack:
                raise ValueError("unbalanced closing brace")
            brace_pairs.append((brace_stack.pop(), i))
        elif ch == "(":
            paren_stack.append(i)
        elif ch == ")":
            if paren_stack:
                paren_match[i] = paren_stack.pop()
        i += 1
    if brace_stack:
        raise ValueError("unbalanced opening brace")
    return brace_pairs, paren_match


def _line_starts(source: str) -> list[int]:
    starts = [0]
    for idx, ch in enumerate(source):
        if ch == "\n":
            starts.append(idx + 1)
    return starts


def _line_of(offset: int, starts: list[int]) -> int:
    lo, hi = 0, len(starts) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if starts[mid] <= offset:
            lo = mid
        else:
            hi = mid - 1
    return lo + 1


def _c_function_at(source: str, open_idx: int, paren_match: dict[int, int]):
    """(is_function, name, signature_offset) for a brace at open_idx."""
    p = open_idx - 1
    while p >= 0 and source[p].isspace():
        p -= 1
    if p < 0 or source[p] != ")":
        return False, None, open_idx
    lparen = paren_match.get(p)
    if lparen is None:
        return False, None, open_idx
    q = lparen - 1
    while q >= 0 and source[q].isspace():
        q -= 1
    end = q
    while q >= 0 and source[q] in _CPP_NAME_CHARS:
        q -= 1
    name = source[q + 1:end + 1]
    if not name or name[0].isdigit():
        return False, None, open_idx
    if name in _C_CONTROL_KEYWORDS:
        return False, None, open_idx
    return True, name, q + 1


def _go_function_at(source: str, open_idx: int, starts: list[int]):
    line_no = _line_of(open_idx, starts)
    line_start = starts[line_no - 1]
    prefix = source[line_start:open_idx]
    if not re.search(r"\bfunc\b", prefix):
        return False, None, open_idx
    m = _GO_FUNC_NAME_RE.search(prefix)
    name = m.group(1) if m else None
    func_pos = line_start + prefix.index("func")
    return True, name, func_pos


def _scanner_parse(source: str, line: int, language: LanguageId):
    """(innermost enclosing function extent, coarse structural facts)."""
    brace_pairs, paren_match = _scan_pairs(source, language)
    starts = _line_starts(source)
    functions: list[_FunctionExtent] = []
    blocks: list[tuple[int, int]] = []
    for open_idx, close_idx in brace_pairs:
        open_line = _line_of(open_idx, starts)
        close_line = _line_of(close_idx, starts)
        blocks.append((open_line, close_line))
        if language is LanguageId.GO:
            is_fn, name, sig_offset = _go_function_at(source, open_idx, starts)
        else:
            is_fn, name, sig_offset = _c_function_at(source, open_idx, paren_match)
        if is_fn:
            functions.append(
                _FunctionExtent(_line_of(sig_offset, starts), close_line, name))
    enclosing = None
    for fn in functions:
        if fn.contains(line) and (enclosing is None
                                  or fn.line_count < enclosing.line_count):
            enclosing = fn
    return enclosing, functions, blocks


def _scanner_kinds(language: LanguageId, window: tuple[int, int],
                   functions, blocks, lines: list[str]) -> tuple[str, ...]:
    root = "source_file" if language is LanguageId.GO else "translation_unit"
    fn_kind = ("function_declaration" if language is LanguageId.GO
               else "function_definition")
    kinds = [root]
    lo, hi = window
    if any(f.start_line <= hi and f.end_line >= lo for f in functions):
        kinds.append(fn_kind)
    if any(b[0] <= hi and b[1] >= lo for b in blocks):
        kinds.append("block")
    if language is not LanguageId.GO and any(
            lines[i - 1].lstrip().startswith("#") for i in range(lo, hi + 1)):
        kinds.append("preprocessor_line")
    return tuple(kinds)


# ------------------------------------------------------------- window


def _shrink_to_fit(lines: list[str], start: int, end: int, line: int,
                   max_bytes: int) -> tuple[int, int, bool]:
    """Symmetric truncation around `line`; the flag reports that the
    byte budget forced truncation (or still cannot be met at line
    granularity)."""
    oversize = _byte_len(_snippet(lines, start, end)) > max_bytes
    while _byte_len(_snippet(lines, start, end)) > max_bytes and start < end:
        if line - start >= end - line:
            start += 1
        else:
            end -= 1
    return start, end, oversize


def extract_ast_window(source: str, line: int, config: ExtractionConfig,
                       language: LanguageId) -> AstWindow:
    """Window = min(enclosing function, ±k lines), parse failures fall
    back to plain ±k text with degraded=True."""
    if source == "":
        raise EmptySource("cannot extract a window from empty source")
    lines = _split_lines(source)
    if not lines:
        raise EmptySource("cannot extract a window from empty source")
    line = max(1, min(line, len(lines)))
    k_start = max(1, line - config.k)
    k_end = min(len(lines), line + config.k)

    enclosing = None
    kinds: tuple[str, ...] = ()
    parse_ok = False
    try:
        if language is LanguageId.PYTHON:
            enclosing, stmt_kinds = _python_parse(source, line)
            parse_ok = True
        else:
            enclosing, functions, blocks = _scanner_parse(source, line, language)
            parse_ok = True
    except (SyntaxError, ValueError, RecursionError):
        parse_ok = False

    if not parse_ok:
        start, end, _ = _shrink_to_fit(lines, k_start, k_end, line,
                                       config.max_snippet_bytes)
        return AstWindow(
            snippet=_snippet(lines, start, end),
            line_range=(start, end),
            enclosing_symbol=None,
            node_kinds=(),
            degraded=True,
        )

    start, end = k_start, k_end
    if enclosing is not None and enclosing.line_count <= (k_end - k_start + 1):
        fn_snippet = _snippet(lines, enclosing.start_line, enclosing.end_line)
        if _byte_len(fn_snippet) <= config.max_snippet_bytes:
            start, end = enclosing.start_line, enclosing.end_line

    start, end, truncated = _shrink_to_fit(lines, start, end, line,
                                           config.max_snippet_bytes)

    if language is LanguageId.PYTHON:
        seen: list[str] = ["Module"]
        for s, e, kind in sorted(stmt_kinds):
            if s <= end and e >= start and kind not in seen:
                seen.append(kind)
        kinds = tuple(seen[:12])
    else:
        kinds = _scanner_kinds(language, (start, end), functions, blocks, lines)

    return AstWindow(
        snippet=_snippet(lines, start, end),
        line_range=(start, end),
        enclosing_symbol=enclosing.name if enclosing else None,
        node_kinds=kinds,
        degraded=truncated,
    )
