"""Search source clients and the timeout-guarded dispatch wrapper.

Three HTTP adapters cover StackOverflow-style, GitHub-issues-style,
and generic web-search APIs; a fixture client replays recorded
responses from disk (and can simulate stalls and failures) so the
whole retrieval path is testable offline.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from ..errors import SourceError
from .types import RetrievalConfig, SearchQuery, SearchResultDoc, SourceKind

log = logging.getLogger("warp.retrieval")

# transport(url, params, headers) -> decoded JSON
Transport = Callable[[str, dict, dict], dict]


def _httpx_transport(url: str, params: dict, headers: dict) -> dict:
    import httpx

    response = httpx.get(url, params=params, headers=headers, timeout=30.0)
    response.raise_for_status()
    return response.json()


def normalize_query_text(text: str) -> str:
    return " ".join(text.lower().split())


def request_key(kind: SourceKind, query_text: str) -> str:
    payload = f"{kind.value}\n{normalize_query_text(query_text)}"
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


class SourceClient(ABC):
    @property
    @abstractmethod
    def kind(self) -> SourceKind: ...

    @abstractmethod
    def search(self, query_text: str, limit: int) -> list[SearchResultDoc]: ...


class FixtureSourceClient(SourceClient):
    """Replays recorded responses keyed by request hash.

    Fixture payloads may instead carry {"error": msg} to raise, or
    {"stall_seconds": s} to sleep past a timeout.
    """

    def __init__(self, kind: SourceKind, fixture_dir: str | Path):
        self._kind = kind
        self._dir = Path(fixture_dir)

    @property
    def kind(self) -> SourceKind:
        return self._kind

    def _path(self, query_text: str) -> Path:
        return self._dir / f"{request_key(self._kind, query_text)}.json"

    def search(self, query_text: str, limit: int) -> list[SearchResultDoc]:
        path = self._path(query_text)
        if not path.is_file():
            raise SourceError(
                f"no recorded {self._kind.value} response for {query_text!r} "
                f"(expected {path.name})")
        payload = json.loads(path.read_text())
        if "error" in payload:
            raise SourceError(str(payload["error"]))
        if "stall_seconds" in payload:
            time.sleep(float(payload["stall_seconds"]))
        docs = []
        for raw in payload.get("docs", [])[:limit]:
            docs.append(SearchResultDoc(
                url=raw["url"],
                title=raw.get("title", ""),
                body=raw.get("body", ""),
                source=self._kind,
                published_at=raw.get("published_at"),
                source_signals=dict(raw.get("source_signals", {})),
            ))
        return docs

    def store(self, query_text: str, docs: list[SearchResultDoc]) -> Path:
        """Record documents for later replay (fixture generation)."""
        self._dir.mkdir(parents=True, exist_ok=True)
        path = self._path(query_text)
        payload = {
            "query": normalize_query_text(query_text),
            "docs": [
                {
                    "url": d.url,
                    "title": d.title,
                    "body": d.body,
                    "published_at": d.published_at,
                    "source_signals": dict(d.source_signals),
                }
                for d in docs
            ],
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")
        return path


def _iso_to_ms(value: Optional[str]) -> Optional[int]:
    if not value:
        return None
    try:
        stamp = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        return None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return int(stamp.timestamp() * 1000)


class StackOverflowClient(SourceClient):
    def __init__(self, base_url: str = "https://api.stackexchange.com",
                 api_key_env: str = "WARP_SO_KEY",
                 transport: Transport = _httpx_transport):
        self._base_url = base_url.rstrip("/")
        self._api_key_env = api_key_env
        self._transport = transport

    @property
    def kind(self) -> SourceKind:
        return SourceKind.STACK_OVERFLOW

    def search(self, query_text: str, limit: int) -> list[SearchResultDoc]:
        params = {
            "q": query_text,
            "site": "stackoverflow",
            "pagesize": limit,
            "filter": "withbody",
            "sort": "relevance",
        }
        key = os.environ.get(self._api_key_env)
        if key:
            params["key"] = key
        try:
            payload = self._transport(
                f"{self._base_url}/2.3/search/advanced", params, {})
            items = payload["items"]
        except SourceError:
            raise
        except Exception as exc:
            raise SourceError(f"stackoverflow search failed: {exc}") from exc
        docs = []
        for item in items[:limit]:
            created = item.get("creation_date")
            docs.append(SearchResultDoc(
                url=item.get("link", ""),
                title=item.get("title", ""),
                body=item.get("body", ""),
                source=self.kind,
                published_at=created * 1000 if created else None,
                source_signals={
                    "score": float(item.get("score", 0)),
                    "accepted": 1.0 if item.get("is_answered") else 0.0,
                    "answer_count": float(item.get("answer_count", 0)),
                },
            ))
        return docs


class GitHubIssuesClient(SourceClient):
    def __init__(self, base_url: str = "https://api.github.com",
                 api_key_env: str = "WARP_GH_KEY",
                 transport: Transport = _httpx_transport):
        self._base_url = base_url.rstrip("/")
        self._api_key_env = api_key_env
        self._transport = transport

    @property
    def kind(self) -> SourceKind:
        return SourceKind.GITHUB_ISSUES

    def search(self, query_text: str, limit: int) -> list[SearchResultDoc]:
        headers = {"Accept": "application/vnd.github+json"}
        token = os.environ.get(self._api_key_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        params = {"q": f"{query_text} in:title,body", "per_page": limit}
        try:
            payload = self._transport(
                f"{self._base_url}/search/issues", params, headers)
            items = payload["items"]
        except SourceError:
            raise
        except Exception as exc:
            raise SourceError(f"github issues search failed: {exc}") from exc
        docs = []
        for item in items[:limit]:
            docs.append(SearchResultDoc(
                url=item.get("html_url", ""),
                title=item.get("title", ""),
                body=item.get("body") or "",
                source=self.kind,
                published_at=_iso_to_ms(item.get("created_at")),
                source_signals={
                    "comments": float(item.get("comments", 0)),
                    "open": 1.0 if item.get("state") == "open" else 0.0,
                },
            ))
        return docs


class WebSearchClient(SourceClient):
    def __init__(self, base_url: str, api_key_env: str = "WARP_WEB_KEY",
                 transport: Transport = _httpx_transport):
        self._base_url = base_url
        self._api_key_env = api_key_env
        self._transport = transport

    @property
    def kind(self) -> SourceKind:
        return SourceKind.WEB_SEARCH

    def search(self, query_text: str, limit: int) -> list[SearchResultDoc]:
        headers = {}
        key = os.environ.get(self._api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            payload = self._transport(
                self._base_url, {"q": query_text, "count": limit}, headers)
            results = payload["results"]
        except SourceError:
            raise
        except Exception as exc:
            raise SourceError(f"web search failed: {exc}") from exc
        docs = []
        for item in results[:limit]:
            docs.append(SearchResultDoc(
                url=item.get("url", ""),
                title=item.get("title", ""),
                body=item.get("snippet", "") or item.get("body", ""),
                source=self.kind,
                published_at=_iso_to_ms(item.get("published")),
                source_signals={},
            ))
        return docs


def search_source(query: SearchQuery, client: SourceClient,
                  config: RetrievalConfig = RetrievalConfig()) -> list[SearchResultDoc]:
    """Dispatch one query with the per-source timeout.  Failures and
    timeouts degrade to an empty list and a log line; they never
    propagate."""
    if client.kind is not query.target:
        raise ValueError(
            f"client kind {client.kind.value} does not match query target "
            f"{query.target.value}")
    # shutdown(wait=False) throughout: joining a stalled worker here would
    # reintroduce the very hang the timeout exists to bound.
    pool = ThreadPoolExecutor(max_workers=1)
    future = pool.submit(client.search, query.text, config.k_docs)
    try:
        docs = future.result(timeout=config.per_source_timeout)
    except FutureTimeout:
        log.warning("source timeout: %s after %.2fs for %r",
                    query.target.value, config.per_source_timeout, query.text)
        _swallow(future)
        return []
    except SourceError as exc:
        log.warning("source error: %s for %r: %s",
                    query.target.value, query.text, exc)
        return []
    except Exception as exc:
        log.warning("source failure: %s for %r: %s",
                    query.target.value, query.text, exc)
        return []
    finally:
        pool.shutdown(wait=False)

    unique: list[SearchResultDoc] = []
    seen_urls: set[str] = set()
    for doc in docs:
        if doc.url and doc.url in seen_urls:
            continue
        seen_urls.add(doc.url)
        unique.append(doc)
        if len(unique) == config.k_docs:
            break
    return unique


def _swallow(future) -> None:
    """Detach a timed-out worker so its eventual error is not lost noisily."""
    def _done(f):
        try:
            f.result()
        except Exception:
            pass
    future.add_done_callback(_done)
