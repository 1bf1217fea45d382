"""Unified-diff engine: parse, render, apply, invert, and compare fixes.

All candidate and ground-truth fixes travel through the system as
`diff -u` text.  Application is strict (no fuzz): a context or remove
line that does not match the source byte-for-byte refuses to apply.
Rendering computes a true longest-common-subsequence line diff, so
emitted hunks are minimal.

End-of-line bookkeeping uses the standard ``\\ No newline at end of
file`` marker; internally every hunk line carries a ``no_eol`` flag.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import ContextMismatch, DiffSyntaxError, HunkCountMismatch

NO_NEWLINE_MARKER = "\\ No newline at end of file"


class LineKind(str, Enum):
    CONTEXT = "context"
    REMOVE = "remove"
    ADD = "add"


_PREFIX_TO_KIND = {" ": LineKind.CONTEXT, "-": LineKind.REMOVE, "+": LineKind.ADD}
_KIND_TO_PREFIX = {v: k for k, v in _PREFIX_TO_KIND.items()}


@dataclass(frozen=True)
class DiffLine:
    kind: LineKind
    text: str
    no_eol: bool = False  # line is final in its file and lacks a trailing newline


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_len: int
    new_start: int
    new_len: int
    lines: tuple[DiffLine, ...]

    def counted_old(self) -> int:
        return sum(1 for l in self.lines if l.kind in (LineKind.CONTEXT, LineKind.REMOVE))

    def counted_new(self) -> int:
        return sum(1 for l in self.lines if l.kind in (LineKind.CONTEXT, LineKind.ADD))

    def changed_line_count(self) -> int:
        return sum(1 for l in self.lines if l.kind is not LineKind.CONTEXT)


@dataclass(frozen=True)
class UnifiedDiff:
    old_path: str = ""
    new_path: str = ""
    hunks: tuple[Hunk, ...] = ()

    @property
    def is_identity(self) -> bool:
        return not self.hunks

    def changed_line_count(self) -> int:
        return sum(h.changed_line_count() for h in self.hunks)


_HUNK_HEADER_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


def _split_keep_nl(text: str) -> list[str]:
    """Split into lines that keep their trailing ``\\n``; only LF is a separator."""
    if text == "":
        return []
    parts = text.split("\n")
    lines = [p + "\n" for p in parts[:-1]]
    if parts[-1] != "":
        lines.append(parts[-1])
    return lines


def _strip_header_path(raw: str) -> str:
    # `diff -u` appends a tab plus timestamp after the path
    return raw.split("\t", 1)[0].strip()


def parse_unified_diff(text: str) -> UnifiedDiff:
    """Strictly parse unified-diff text.

    Empty (or whitespace-only) input yields the identity diff.  Raises
    DiffSyntaxError for malformed structure and HunkCountMismatch when a
    hunk body disagrees with its declared lengths.
    """
    if not text.strip():
        return UnifiedDiff()

    lines = text.split("\n")
    # drop a single trailing empty element produced by a final newline
    if lines and lines[-1] == "":
        lines.pop()

    i = 0
    n = len(lines)
    old_path = ""
    new_path = ""

    if i < n and lines[i].startswith("--- "):
        old_path = _strip_header_path(lines[i][4:])
        i += 1
        if i >= n or not lines[i].startswith("+++ "):
            raise DiffSyntaxError("'---' header not followed by '+++'", i + 1)
        new_path = _strip_header_path(lines[i][4:])
        i += 1
    elif i < n and not lines[i].startswith("@@"):
        raise DiffSyntaxError(f"expected '--- ' header or '@@' hunk, got {lines[i]!r}", i + 1)

    hunks: list[Hunk] = []
    while i < n:
        header = lines[i]
        if header == "":
            # tolerate blank separator lines between hunks / after the diff
            i += 1
            continue
        m = _HUNK_HEADER_RE.match(header)
        if not m:
            raise DiffSyntaxError(f"expected hunk header, got {header!r}", i + 1)
        header_line_no = i + 1
        old_start = int(m.group(1))
        old_len = int(m.group(2)) if m.group(2) is not None else 1
        new_start = int(m.group(3))
        new_len = int(m.group(4)) if m.group(4) is not None else 1
        i += 1

        body: list[DiffLine] = []
        seen_old = 0
        seen_new = 0
        while i < n and (seen_old < old_len or seen_new < new_len):
            raw = lines[i]
            if raw == "":
                # tolerated: some emitters strip the ' ' prefix from empty context lines
                kind, text_part = LineKind.CONTEXT, ""
            elif raw[0] in _PREFIX_TO_KIND:
                kind, text_part = _PREFIX_TO_KIND[raw[0]], raw[1:]
            elif raw.startswith("\\"):
                if not body:
                    raise DiffSyntaxError("'\\' marker with no preceding line", i + 1)
                body[-1] = DiffLine(body[-1].kind, body[-1].text, no_eol=True)
                i += 1
                continue
            else:
                break
            if kind in (LineKind.CONTEXT, LineKind.REMOVE):
                seen_old += 1
            if kind in (LineKind.CONTEXT, LineKind.ADD):
                seen_new += 1
            body.append(DiffLine(kind, text_part))
            i += 1

        # a trailing no-newline marker may follow the final counted line
        if i < n and lines[i].startswith("\\"):
            if not body:
                raise DiffSyntaxError("'\\' marker with no preceding line", i + 1)
            body[-1] = DiffLine(body[-1].kind, body[-1].text, no_eol=True)
            i += 1

        if seen_old != old_len or seen_new != new_len:
            raise HunkCountMismatch(
                f"hunk declares -{old_len}/+{new_len} but body provides "
                f"-{seen_old}/+{seen_new}",
                header_line_no,
            )
        hunks.append(Hunk(old_start, old_len, new_start, new_len, tuple(body)))

    # enforce ordering / non-overlap on the old file
    prev_end = 0
    for idx, h in enumerate(hunks):
        start = h.old_start if h.old_len > 0 else h.old_start + 1
        if start <= prev_end:
            raise DiffSyntaxError(f"hunk {idx + 1} overlaps or precedes hunk {idx}", 1)
        prev_end = h.old_start + h.old_len - 1 if h.old_len > 0 else h.old_start
    return UnifiedDiff(old_path, new_path, tuple(hunks))


def format_diff(diff: UnifiedDiff) -> str:
    """Render a UnifiedDiff back to `diff -u` text.  Identity renders as ''."""
    if diff.is_identity:
        return ""
    out: list[str] = [f"--- {diff.old_path}", f"+++ {diff.new_path}"]
    for h in diff.hunks:
        out.append(f"@@ -{h.old_start},{h.old_len} +{h.new_start},{h.new_len} @@")
        for line in h.lines:
            out.append(_KIND_TO_PREFIX[line.kind] + line.text)
            if line.no_eol:
                out.append(NO_NEWLINE_MARKER)
    return "\n".join(out) + "\n"


def _source_line_matches(src_line: str, dline: DiffLine) -> bool:
    expected = dline.text if dline.no_eol else dline.text + "\n"
    return src_line == expected


def apply_diff(source: str, diff: UnifiedDiff) -> str:
    """Apply a diff with exact context matching (no fuzz).

    Raises ContextMismatch naming the offending hunk and 1-based source
    line when any context/remove line disagrees with the source.
    """
    if diff.is_identity:
        return source
    src = _split_keep_nl(source)
    out: list[str] = []
    cursor = 0  # 0-based index into src of the next uncopied line

    for hunk_index, h in enumerate(diff.hunks):
        # for pure insertions old_start names the line *after which* to insert
        anchor = h.old_start - 1 if h.old_len > 0 else h.old_start
        if anchor < cursor or anchor > len(src):
            raise ContextMismatch(hunk_index, anchor + 1, "hunk start outside remaining source")
        out.extend(src[cursor:anchor])
        cursor = anchor
        for dline in h.lines:
            if dline.kind in (LineKind.CONTEXT, LineKind.REMOVE):
                if cursor >= len(src):
                    raise ContextMismatch(hunk_index, cursor + 1, "source exhausted")
                if not _source_line_matches(src[cursor], dline):
                    raise ContextMismatch(
                        hunk_index, cursor + 1,
                        f"expected {dline.text!r}, found {src[cursor]!r}",
                    )
                if dline.kind is LineKind.CONTEXT:
                    out.append(src[cursor])
                cursor += 1
            else:  # ADD
                out.append(dline.text if dline.no_eol else dline.text + "\n")
    out.extend(src[cursor:])
    return "".join(out)


def invert_diff(diff: UnifiedDiff) -> UnifiedDiff:
    """Line-wise inverse: applying it to the patched text restores the original."""
    inv_hunks = []
    swap = {LineKind.ADD: LineKind.REMOVE, LineKind.REMOVE: LineKind.ADD,
            LineKind.CONTEXT: LineKind.CONTEXT}
    for h in diff.hunks:
        inv_lines = tuple(DiffLine(swap[l.kind], l.text, l.no_eol) for l in h.lines)
        inv_hunks.append(Hunk(h.new_start, h.new_len, h.old_start, h.old_len, inv_lines))
    return UnifiedDiff(diff.new_path, diff.old_path, tuple(inv_hunks))


def _lcs_keep_flags(a: list[str], b: list[str]) -> list[tuple[str, str]]:
    """Edit script between line lists as (op, line) with op in {'=', '-', '+'}.

    True LCS via dynamic programming, with common prefix/suffix stripped
    first so the quadratic table only covers the changed middle.
    """
    lo = 0
    while lo < len(a) and lo < len(b) and a[lo] == b[lo]:
        lo += 1
    hi = 0
    while (hi < len(a) - lo and hi < len(b) - lo and a[len(a) - 1 - hi] == b[len(b) - 1 - hi]):
        hi += 1
    mid_a = a[lo:len(a) - hi]
    mid_b = b[lo:len(b) - hi]

    script: list[tuple[str, str]] = [("=", line) for line in a[:lo]]

    la, lb = len(mid_a), len(mid_b)
    if la and lb:
        # dp[i][j] = LCS length of mid_a[i:], mid_b[j:]
        dp = [[0] * (lb + 1) for _ in range(la + 1)]
        for i in range(la - 1, -1, -1):
            row, nxt = dp[i], dp[i + 1]
            for j in range(lb - 1, -1, -1):
                if mid_a[i] == mid_b[j]:
                    row[j] = nxt[j + 1] + 1
                else:
                    row[j] = nxt[j] if nxt[j] >= row[j + 1] else row[j + 1]
        i = j = 0
        while i < la and j < lb:
            if mid_a[i] == mid_b[j]:
                script.append(("=", mid_a[i]))
                i += 1
                j += 1
            elif dp[i + 1][j] >= dp[i][j + 1]:
                script.append(("-", mid_a[i]))
                i += 1
            else:
                script.append(("+", mid_b[j]))
                j += 1
        script.extend(("-", line) for line in mid_a[i:])
        script.extend(("+", line) for line in mid_b[j:])
    else:
        script.extend(("-", line) for line in mid_a)
        script.extend(("+", line) for line in mid_b)

    script.extend(("=", line) for line in a[len(a) - hi:])
    return script


def render_diff(before: str, after: str, path: str, context_lines: int = 3) -> UnifiedDiff:
    """Minimal LCS line diff between two texts with `diff -u` style hunks."""
    if before == after:
        return UnifiedDiff()
    a = _split_keep_nl(before)
    b = _split_keep_nl(after)
    script = _lcs_keep_flags(a, b)

    # indices of script entries that are changes
    change_idx = [i for i, (op, _) in enumerate(script) if op != "="]
    groups: list[list[int]] = []
    for idx in change_idx:
        if groups and idx - groups[-1][-1] <= 2 * context_lines:
            groups[-1].append(idx)
        else:
            groups.append([idx])

    hunks: list[Hunk] = []
    old_pos = 1  # 1-based line numbers tracked across the script
    new_pos = 1
    script_pos = 0

    def advance_to(target: int):
        nonlocal old_pos, new_pos, script_pos
        while script_pos < target:
            op, _ = script[script_pos]
            if op == "=":
                old_pos += 1
                new_pos += 1
            elif op == "-":
                old_pos += 1
            else:
                new_pos += 1
            script_pos += 1

    for group in groups:
        start = max(group[0] - context_lines, 0)
        end = min(group[-1] + context_lines + 1, len(script))
        advance_to(start)
        h_old_start, h_new_start = old_pos, new_pos
        body: list[DiffLine] = []
        old_count = new_count = 0
        while script_pos < end:
            op, line = script[script_pos]
            text = line[:-1] if line.endswith("\n") else line
            no_eol = not line.endswith("\n")
            if op == "=":
                body.append(DiffLine(LineKind.CONTEXT, text, no_eol))
                old_pos += 1
                new_pos += 1
                old_count += 1
                new_count += 1
            elif op == "-":
                body.append(DiffLine(LineKind.REMOVE, text, no_eol))
                old_pos += 1
                old_count += 1
            else:
                body.append(DiffLine(LineKind.ADD, text, no_eol))
                new_pos += 1
                new_count += 1
            script_pos += 1
        # unified convention: zero-length side anchors one line earlier
        hunk_old_start = h_old_start if old_count > 0 else h_old_start - 1
        hunk_new_start = h_new_start if new_count > 0 else h_new_start - 1
        hunks.append(Hunk(hunk_old_start, old_count, hunk_new_start, new_count, tuple(body)))

    return UnifiedDiff(path, path, tuple(hunks))


def _normalize_output(text: str) -> str:
    """LF line endings, per-line trailing whitespace stripped, trailing blank lines dropped."""
    unified = text.replace("\r\n", "\n").replace("\r", "\n")
    lines = [line.rstrip(" \t") for line in unified.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines)


def diffs_equivalent(candidate: UnifiedDiff, truth: UnifiedDiff, source: str) -> bool:
    """True iff both diffs apply cleanly and produce the same normalized output."""
    try:
        patched_candidate = apply_diff(source, candidate)
        patched_truth = apply_diff(source, truth)
    except ContextMismatch:
        return False
    return _normalize_output(patched_candidate) == _normalize_output(patched_truth)
