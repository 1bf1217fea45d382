"""Deterministic error-message tokenization.

Splits on whitespace and punctuation while keeping quoted/backticked
identifiers (quotes included) and path-like tokens intact, so every
identifier in the raw message survives as one contiguous token.
"""

from __future__ import annotations

# quote pairs recognized when they sit at token boundaries
_QUOTE_PAIRS = {"'": "'", '"': '"', "`": "`", "‘": "’"}

# edge characters allowed to remain on a bare token (identifier/path/flag/version material)
_KEEP_EDGE = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_./\\-+#")


def _is_boundary(ch: str | None) -> bool:
    return ch is None or ch.isspace() or not (ch.isalnum() or ch == "_")


def _strip_edges(chunk: str) -> str:
    start, end = 0, len(chunk)
    while start < end and chunk[start] not in _KEEP_EDGE:
        start += 1
    while end > start and chunk[end - 1] not in _KEEP_EDGE:
        end -= 1
    token = chunk[start:end]
    # sentence-final periods are separators; leading dots (relative paths) are not
    return token.rstrip(".")


def tokenize_message(message: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    n = len(message)
    chunk_start: int | None = None

    def flush(upto: int):
        nonlocal chunk_start
        if chunk_start is not None:
            token = _strip_edges(message[chunk_start:upto])
            if token:
                tokens.append(token)
            chunk_start = None

    while i < n:
        ch = message[i]
        if ch.isspace():
            flush(i)
            i += 1
            continue
        closing = _QUOTE_PAIRS.get(ch)
        if closing is not None and _is_boundary(message[i - 1] if i > 0 else None):
            end = message.find(closing, i + 1)
            while end != -1 and not _is_boundary(message[end + 1] if end + 1 < n else None):
                end = message.find(closing, end + 1)
            if end != -1:
                flush(i)
                tokens.append(message[i:end + 1])
                i = end + 1
                continue
        if chunk_start is None:
            chunk_start = i
        i += 1
    flush(n)
    return tokens
