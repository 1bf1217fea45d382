"""Tool-specific diagnostic parsing into language-neutral records.

Parsers are deterministic and total: unparseable candidate lines are
skipped and counted, never fatal.  Python tracebacks collapse to a
single diagnostic located at the innermost user-code frame; gcc/clang
``note:`` lines come through with Note severity; Go continuation lines
(tab-indented detail under an error) are recognized and ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import PurePosixPath
from typing import Optional

from .capture import RawCapture


class Tool(str, Enum):
    GCC_CLANG = "GccClang"
    PYTHON_RUNTIME = "PythonRuntime"
    GO_BUILD = "GoBuild"


class Severity(str, Enum):
    ERROR = "Error"
    WARNING = "Warning"
    NOTE = "Note"


@dataclass(frozen=True)
class RawSpan:
    """Byte range into one captured stream."""
    stream: str  # "stdout" | "stderr"
    start: int
    end: int

    def resolve(self, capture: RawCapture) -> str:
        return capture.stream_bytes(self.stream)[self.start:self.end].decode(
            "utf-8", "surrogateescape")


@dataclass(frozen=True)
class Diagnostic:
    tool: Tool
    severity: Severity
    file_path: str
    line: int
    column: Optional[int]
    message: str
    raw_span: RawSpan

    def __post_init__(self):
        if self.line < 1:
            raise ValueError("line must be >= 1")
        if self.column is not None and self.column < 1:
            raise ValueError("column, when present, must be >= 1")
        if not self.message:
            raise ValueError("message must be non-empty")


@dataclass
class ScanResult:
    diagnostics: list[Diagnostic]
    skipped_candidates: int


_GCC_LINE_RE = re.compile(
    r"^(?P<file>[^\s:][^:\n]*):(?P<line>\d+):(?:(?P<col>\d+):)?\s*"
    r"(?P<sev>fatal error|error|warning|note):\s*(?P<msg>.+)$"
)
_GO_LINE_RE = re.compile(
    r"^(?P<file>\S+\.go):(?P<line>\d+):(?:(?P<col>\d+):)?\s+(?P<msg>.+)$"
)
_PY_WARNING_RE = re.compile(
    r"^(?P<file>[^\s:][^:\n]*):(?P<line>\d+):\s*(?P<cat>\w*Warning):\s*(?P<msg>.+)$"
)
_PY_FRAME_RE = re.compile(r'^\s+File "(?P<file>[^"]+)", line (?P<line>\d+)(?:, in (?P<name>.+))?$')
_PY_EXCEPTION_RE = re.compile(r"^\S.*$")
_CANDIDATE_RE = re.compile(r"^\S+:\d+")
_PY_CHAIN_MARKERS = (
    "During handling of the above exception, another exception occurred:",
    "The above exception was the direct cause of the following exception:",
)

_GCC_SEVERITY = {
    "error": Severity.ERROR,
    "fatal error": Severity.ERROR,
    "warning": Severity.WARNING,
    "note": Severity.NOTE,
}

_C_FAMILY_COMMANDS = {"gcc", "g++", "clang", "clang++", "cc", "c++"}


def _command_name(command_line: str) -> str:
    head = command_line.strip().split()
    return PurePosixPath(head[0]).name if head else ""


def detect_tool(capture: RawCapture, tool_hint: Optional[Tool] = None) -> Optional[Tool]:
    """Pick the parser for a capture: explicit hint, then command name,
    then content sniffing.  None means no known tool produced the output."""
    if tool_hint is not None:
        return tool_hint
    cmd = _command_name(capture.command_line)
    if cmd in _C_FAMILY_COMMANDS:
        return Tool.GCC_CLANG
    if cmd.startswith("python"):
        return Tool.PYTHON_RUNTIME
    if cmd == "go":
        return Tool.GO_BUILD

    combined = capture.stderr + "\n" + capture.stdout
    if "Traceback (most recent call last):" in combined or re.search(
            r'^\s+File "[^"]+", line \d+', combined, re.MULTILINE):
        return Tool.PYTHON_RUNTIME
    for line in combined.splitlines():
        if _GCC_LINE_RE.match(line):
            return Tool.GCC_CLANG
    if re.search(r"^\S+\.go:\d+", combined, re.MULTILINE):
        return Tool.GO_BUILD
    return None


def _lines_with_offsets(capture: RawCapture, stream: str) -> list[tuple[str, int, int]]:
    """(line_text, byte_start, byte_end) for each line of a stream."""
    text = capture.stdout if stream == "stdout" else capture.stderr
    out = []
    offset = 0
    for raw in text.split("\n"):
        blen = len(raw.encode("utf-8", "surrogateescape"))
        out.append((raw, offset, offset + blen))
        offset += blen + 1  # the separating "\n"
    return out


def _parse_gcc_stream(lines, stream: str, result: ScanResult):
    for text, start, end in lines:
        m = _GCC_LINE_RE.match(text)
        if m:
            col = int(m.group("col")) if m.group("col") else None
            result.diagnostics.append(Diagnostic(
                tool=Tool.GCC_CLANG,
                severity=_GCC_SEVERITY[m.group("sev")],
                file_path=m.group("file"),
                line=int(m.group("line")),
                column=col,
                message=m.group("msg").strip(),
                raw_span=RawSpan(stream, start, end),
            ))
        elif _CANDIDATE_RE.match(text):
            result.skipped_candidates += 1


def _parse_go_stream(lines, stream: str, result: ScanResult):
    for text, start, end in lines:
        if text.startswith("#") or text.startswith("\t") or not text.strip():
            continue  # package headers and indented continuations
        m = _GO_LINE_RE.match(text)
        if m:
            col = int(m.group("col")) if m.group("col") else None
            result.diagnostics.append(Diagnostic(
                tool=Tool.GO_BUILD,
                severity=Severity.ERROR,
                file_path=m.group("file"),
                line=int(m.group("line")),
                column=col,
                message=m.group("msg").strip(),
                raw_span=RawSpan(stream, start, end),
            ))
        elif _CANDIDATE_RE.match(text):
            result.skipped_candidates += 1


def _is_user_frame(path: str) -> bool:
    if path.startswith("<"):
        return False
    return "/lib/python" not in path and "site-packages" not in path


def _parse_python_stream(lines, stream: str, result: ScanResult):
    i = 0
    n = len(lines)
    pending_block: Optional[dict] = None  # carried across exception-chain markers

    def emit(block: dict):
        frames = block["frames"]
        chosen = None
        for f in frames:
            if _is_user_frame(f[0]):
                chosen = f  # innermost user frame wins; keep scanning
        if chosen is None and frames:
            chosen = frames[-1]
        if chosen is None:
            result.skipped_candidates += 1
            return
        result.diagnostics.append(Diagnostic(
            tool=Tool.PYTHON_RUNTIME,
            severity=Severity.ERROR,
            file_path=chosen[0],
            line=chosen[1],
            column=None,
            message=block["message"],
            raw_span=RawSpan(stream, block["span_start"], block["span_end"]),
        ))

    def read_block(start_idx: int, span_start: int) -> tuple[Optional[dict], int]:
        """Collect frames and the final exception line from start_idx on."""
        frames: list[tuple[str, int]] = []
        j = start_idx
        while j < n:
            text, s, e = lines[j]
            fm = _PY_FRAME_RE.match(text)
            if fm:
                frames.append((fm.group("file"), int(fm.group("line"))))
                j += 1
                continue
            if text.startswith((" ", "\t")) or text == "":
                j += 1  # source echo / caret lines
                continue
            # first non-indented line terminates the block: the exception line
            return {"frames": frames, "message": text.strip(),
                    "span_start": span_start, "span_end": e}, j + 1
        return None, j

    while i < n:
        text, start, end = lines[i]
        if text == "Traceback (most recent call last):":
            block, i = read_block(i + 1, start)
            if block is None:
                break
            if pending_block is not None:
                block["span_start"] = pending_block["span_start"]
            pending_block = block
            # chained exception: the final block in the chain wins
            k = i
            while k < n and lines[k][0] == "":
                k += 1
            if k < n and lines[k][0] in _PY_CHAIN_MARKERS:
                i = k + 1
                continue
            emit(pending_block)
            pending_block = None
            continue
        if _PY_FRAME_RE.match(text) and pending_block is None:
            # bare SyntaxError block (no traceback header)
            block, i = read_block(i, start)
            if block is not None:
                emit(block)
            continue
        wm = _PY_WARNING_RE.match(text)
        if wm:
            result.diagnostics.append(Diagnostic(
                tool=Tool.PYTHON_RUNTIME,
                severity=Severity.WARNING,
                file_path=wm.group("file"),
                line=int(wm.group("line")),
                column=None,
                message=f'{wm.group("cat")}: {wm.group("msg").strip()}',
                raw_span=RawSpan(stream, start, end),
            ))
        elif _CANDIDATE_RE.match(text):
            result.skipped_candidates += 1
        i += 1
    if pending_block is not None:
        emit(pending_block)


_PARSERS = {
    Tool.GCC_CLANG: _parse_gcc_stream,
    Tool.PYTHON_RUNTIME: _parse_python_stream,
    Tool.GO_BUILD: _parse_go_stream,
}


def scan_streams(capture: RawCapture, tool_hint: Optional[Tool] = None) -> ScanResult:
    """Full scan with observability: diagnostics plus skipped-candidate count."""
    result = ScanResult(diagnostics=[], skipped_candidates=0)
    tool = detect_tool(capture, tool_hint)
    if tool is None:
        for stream in ("stderr", "stdout"):
            for text, _, _ in _lines_with_offsets(capture, stream):
                if _CANDIDATE_RE.match(text):
                    result.skipped_candidates += 1
        return result
    parser = _PARSERS[tool]
    for stream in ("stderr", "stdout"):
        parser(_lines_with_offsets(capture, stream), stream, result)
    return result


def parse_diagnostics(capture: RawCapture, tool_hint: Optional[Tool] = None) -> list[Diagnostic]:
    """All diagnostics found in a capture, in stream order (stderr first)."""
    return scan_streams(capture, tool_hint).diagnostics


def first_error(diagnostics: list[Diagnostic]) -> Optional[Diagnostic]:
    for d in diagnostics:
        if d.severity is Severity.ERROR:
            return d
    return None


def should_trigger_repair(capture: RawCapture, diagnostics: list[Diagnostic]) -> bool:
    """Error-signature rule: nonzero exit AND at least one Error diagnostic."""
    return capture.exit_code != 0 and first_error(diagnostics) is not None
