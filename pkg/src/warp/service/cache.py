"""TTL cache for search-source responses with single-flight fetches.

Keys are the retrieval layer's request hash (source kind + normalized
query text), so one entry serves every query that normalizes the same
way.  Expired entries are never served.  Concurrent callers on a cold
key share one fetch; fetch errors propagate to every caller and nothing
is stored.  The cache is an optimization only: with deterministic
clients, results are identical with the cache disabled.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from ..retrieval import SourceKind
from ..retrieval.sources import SearchResultDoc, SourceClient, request_key

__all__ = ["CacheEntry", "CachingSourceClient", "RetrievalCache", "DEFAULT_TTL_S"]

DEFAULT_TTL_S = 24 * 3600


@dataclass(frozen=True)
class CacheEntry:
    key: str
    value: list[dict[str, Any]]  # serialized documents
    stored_at_ms: int
    ttl_s: float

    def expired(self, now_ms: int) -> bool:
        return now_ms >= self.stored_at_ms + int(self.ttl_s * 1000)


def _doc_to_record(doc: SearchResultDoc) -> dict[str, Any]:
    return {
        "url": doc.url,
        "title": doc.title,
        "body": doc.body,
        "source": doc.source.value,
        "published_at": doc.published_at,
        "source_signals": dict(doc.source_signals),
    }


def _parse_doc(record: dict[str, Any]) -> SearchResultDoc:
    return SearchResultDoc(
        url=record["url"],
        title=record["title"],
        body=record["body"],
        source=SourceKind(record["source"]),
        published_at=record["published_at"],
        source_signals=dict(record["source_signals"]),
    )


class RetrievalCache:
    """In-memory entry map with optional JSON file persistence.

    The clock is injectable and returns epoch milliseconds.
    """

    def __init__(
        self,
        path: Optional[Path | str] = None,
        ttl_s: float = DEFAULT_TTL_S,
        clock: Optional[Callable[[], int]] = None,
    ):
        if ttl_s <= 0:
            raise ValueError("ttl_s must be positive")
        self._path = Path(path) if path is not None else None
        self._ttl_s = ttl_s
        self._clock = clock or (lambda: int(time.time() * 1000))
        self._guard = threading.Lock()
        self._entries: dict[str, CacheEntry] = {}
        self._key_locks: dict[str, threading.Lock] = {}
        if self._path is not None and self._path.exists():
            self._load()

    def __len__(self) -> int:
        with self._guard:
            return len(self._entries)

    def lookup_or_fetch(
        self,
        kind: SourceKind,
        query_text: str,
        fetch: Callable[[], list[SearchResultDoc]],
    ) -> list[SearchResultDoc]:
        key = request_key(kind, query_text)
        with self._guard:
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        # Single-flight: the second caller blocks here until the first
        # stored its result, then reads the fresh entry.
        with key_lock:
            with self._guard:
                entry = self._entries.get(key)
            if entry is not None and not entry.expired(self._clock()):
                return [_parse_doc(record) for record in entry.value]
            docs = fetch()  # errors propagate; nothing is stored
            entry = CacheEntry(
                key=key,
                value=[_doc_to_record(d) for d in docs],
                stored_at_ms=self._clock(),
                ttl_s=self._ttl_s,
            )
            with self._guard:
                self._entries[key] = entry
                self._persist()
            return docs

    # --- persistence ---

    def _persist(self) -> None:
        if self._path is None:
            return
        payload = {
            key: {
                "value": entry.value,
                "stored_at_ms": entry.stored_at_ms,
                "ttl_s": entry.ttl_s,
            }
            for key, entry in self._entries.items()
        }
        self._path.write_text(json.dumps(payload, sort_keys=True) + "\n")

    def _load(self) -> None:
        payload = json.loads(self._path.read_text())
        for key, record in payload.items():
            self._entries[key] = CacheEntry(
                key=key,
                value=record["value"],
                stored_at_ms=record["stored_at_ms"],
                ttl_s=record["ttl_s"],
            )


class CachingSourceClient(SourceClient):
    """Wraps a source client so the retrieval layer hits the cache first."""

    def __init__(self, inner: SourceClient, cache: RetrievalCache):
        self._inner = inner
        self._cache = cache

    @property
    def kind(self) -> SourceKind:
        return self._inner.kind

    def search(self, query_text: str, limit: int) -> list[SearchResultDoc]:
        docs = self._cache.lookup_or_fetch(
            self.kind, query_text, lambda: self._inner.search(query_text, limit)
        )
        return docs[:limit]
