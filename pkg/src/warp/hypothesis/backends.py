"""Pluggable text-generation backends.

The engine never talks to a model directly; it calls a
GeneratorBackend.  Three implementations ship: a replay backend that
returns recorded completions keyed by prompt hash (the test and
benchmark path), a scripted backend fed an explicit completion queue,
and an HTTP adapter for chat/completions-style endpoints.
"""

from __future__ import annotations

import hashlib
import json
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional

from ..errors import BackendUnavailable, ReplayMiss


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    max_tokens: int = 1024


@dataclass(frozen=True)
class Completion:
    text: str
    token_logprobs: Optional[tuple[float, ...]] = None
    usage: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class BackendCapabilities:
    supports_logprobs: bool


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8", "surrogateescape")).hexdigest()[:16]


class GeneratorBackend(ABC):
    @property
    @abstractmethod
    def identity(self) -> str: ...

    @property
    @abstractmethod
    def capabilities(self) -> BackendCapabilities: ...

    @abstractmethod
    def complete(self, prompt: str, params: GenerationParams) -> Completion: ...


class ReplayBackend(GeneratorBackend):
    """Canned completions from fixture files named <prompt_hash>.json."""

    def __init__(self, fixture_dir: str | Path):
        self._dir = Path(fixture_dir)

    @property
    def identity(self) -> str:
        return f"replay:{self._dir.name}"

    @property
    def capabilities(self) -> BackendCapabilities:
        return BackendCapabilities(supports_logprobs=True)

    def complete(self, prompt: str, params: GenerationParams) -> Completion:
        key = prompt_hash(prompt)
        path = self._dir / f"{key}.json"
        if not path.is_file():
            raise ReplayMiss(key, str(self._dir))
        payload = json.loads(path.read_text())
        logprobs = payload.get("token_logprobs")
        return Completion(
            text=payload["text"],
            token_logprobs=tuple(logprobs) if logprobs is not None else None,
            usage=dict(payload.get("usage", {})),
        )

    def store(self, prompt: str, completion: Completion) -> Path:
        """Record a completion for later replay (fixture generation)."""
        self._dir.mkdir(parents=True, exist_ok=True)
        path = self._dir / f"{prompt_hash(prompt)}.json"
        payload = {
            "text": completion.text,
            "token_logprobs": (list(completion.token_logprobs)
                               if completion.token_logprobs is not None else None),
            "usage": dict(completion.usage),
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")
        return path


class ScriptedBackend(GeneratorBackend):
    """Returns queued completions in order; raises when exhausted."""

    def __init__(self, completions: list[Completion], supports_logprobs: bool = False):
        self._queue = list(completions)
        self._supports_logprobs = supports_logprobs
        self.prompts_seen: list[str] = []

    @property
    def identity(self) -> str:
        return "scripted"

    @property
    def capabilities(self) -> BackendCapabilities:
        return BackendCapabilities(supports_logprobs=self._supports_logprobs)

    def complete(self, prompt: str, params: GenerationParams) -> Completion:
        self.prompts_seen.append(prompt)
        if not self._queue:
            raise BackendUnavailable("scripted backend exhausted")
        return self._queue.pop(0)


# transport(url, headers, json_body) -> decoded response dict
Transport = Callable[[str, dict, dict], dict]


def _httpx_transport(url: str, headers: dict, body: dict) -> dict:
    import httpx

    response = httpx.post(url, headers=headers, json=body, timeout=60.0)
    response.raise_for_status()
    return response.json()


class HttpBackend(GeneratorBackend):
    """Adapter for chat/completions-style HTTP endpoints.

    The credential is read from the environment at call time so a
    missing key fails the call, not construction.
    """

    def __init__(self, url: str, model: str, api_key_env: str = "WARP_LLM_KEY",
                 transport: Transport = _httpx_transport):
        self._url = url
        self._model = model
        self._api_key_env = api_key_env
        self._transport = transport

    @property
    def identity(self) -> str:
        return f"http:{self._model}"

    @property
    def capabilities(self) -> BackendCapabilities:
        return BackendCapabilities(supports_logprobs=False)

    def complete(self, prompt: str, params: GenerationParams) -> Completion:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self._api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = {
            "model": self._model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        try:
            payload = self._transport(self._url, headers, body)
            text = payload["choices"][0]["message"]["content"]
            usage = dict(payload.get("usage", {}))
        except BackendUnavailable:
            raise
        except Exception as exc:  # transport and shape failures alike
            raise BackendUnavailable(f"backend call failed: {exc}") from exc
        return Completion(text=text, token_logprobs=None, usage=usage)
