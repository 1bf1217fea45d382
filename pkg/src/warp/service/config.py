"""Service configuration: a strict YAML schema and service assembly.

Unknown keys anywhere in the file are rejected, so typos fail loudly
instead of silently falling back to defaults.  Credentials never appear
in the file: backend and source entries carry only the *name* of an
environment variable, which the clients read at call time.  Relative
paths resolve against the config file's directory.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from ..errors import ConfigError
from ..context import ExtractionConfig
from ..evalharness import SandboxSpec
from ..hypothesis import GeneratorBackend, HttpBackend, ReplayBackend
from ..retrieval import RetrievalConfig, ScoreWeights, SourceKind
from ..retrieval.sources import (
    FixtureSourceClient,
    GitHubIssuesClient,
    SourceClient,
    StackOverflowClient,
    WebSearchClient,
)
from .cache import DEFAULT_TTL_S, CachingSourceClient, RetrievalCache
from .pipeline import PipelineServices

__all__ = [
    "BackendSpec",
    "ServiceConfig",
    "SourceSpec",
    "build_services",
    "load_config",
    "parse_config",
]

_ENV_NAME_RE = re.compile(r"^[A-Z][A-Z0-9_]*$")

BACKEND_KINDS = ("replay", "http")
SOURCE_MODES = ("fixtures", "live")


@dataclass(frozen=True)
class BackendSpec:
    kind: str
    fixture_dir: Optional[str] = None
    url: Optional[str] = None
    model: Optional[str] = None
    key_env: str = "WARP_LLM_KEY"


@dataclass(frozen=True)
class SourceSpec:
    mode: str
    fixture_dir: Optional[str] = None
    base_url: Optional[str] = None
    key_env: Optional[str] = None


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8787
    frontend_dir: Optional[str] = None
    session_log: Optional[str] = None
    cache_enabled: bool = True
    cache_path: Optional[str] = None
    cache_ttl_s: float = DEFAULT_TTL_S
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    sandbox: SandboxSpec = field(default_factory=SandboxSpec)
    hypothesis_budget: int = 2048
    synthesis_budget: int = 4096
    build_timeout_s: float = 120.0
    debounce_ms: int = 300
    hypothesis_backend: BackendSpec = BackendSpec("replay", fixture_dir="fixtures/hypothesis")
    synthesis_backend: BackendSpec = BackendSpec("replay", fixture_dir="fixtures/synthesis")
    sources: Mapping[SourceKind, SourceSpec] = field(default_factory=dict)


def _mapping(value: Any, where: str) -> dict[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping, got {type(value).__name__}")
    return value


def _check_keys(mapping: Mapping[str, Any], allowed: tuple[str, ...], where: str) -> None:
    extra = sorted(set(mapping) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _typed(mapping: Mapping[str, Any], key: str, kind: type, where: str,
           default: Any) -> Any:
    if key not in mapping or mapping[key] is None:
        return default
    value = mapping[key]
    # bool is an int subclass; keep the two distinct in the schema.
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ConfigError(
            f"{where}.{key} must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _env_name(name: str, where: str) -> str:
    if not _ENV_NAME_RE.match(name):
        raise ConfigError(
            f"{where} must name an environment variable "
            f"(letters, digits, underscores), got {name!r}"
        )
    return name


def _resolve(path: Optional[str], base_dir: Path) -> Optional[str]:
    if path is None:
        return None
    return str((base_dir / path).resolve()) if not Path(path).is_absolute() else path


def _parse_backend(raw: Mapping[str, Any], where: str, base_dir: Path) -> BackendSpec:
    _check_keys(raw, ("kind", "fixture_dir", "url", "model", "key_env"), where)
    kind = _typed(raw, "kind", str, where, None)
    if kind not in BACKEND_KINDS:
        raise ConfigError(f"{where}.kind must be one of {BACKEND_KINDS}, got {kind!r}")
    spec = BackendSpec(
        kind=kind,
        fixture_dir=_resolve(_typed(raw, "fixture_dir", str, where, None), base_dir),
        url=_typed(raw, "url", str, where, None),
        model=_typed(raw, "model", str, where, None),
        key_env=_env_name(_typed(raw, "key_env", str, where, "WARP_LLM_KEY"),
                          f"{where}.key_env"),
    )
    if kind == "replay" and not spec.fixture_dir:
        raise ConfigError(f"{where}: replay backend requires fixture_dir")
    if kind == "http" and not (spec.url and spec.model):
        raise ConfigError(f"{where}: http backend requires url and model")
    return spec


def _parse_source(raw: Mapping[str, Any], kind: SourceKind, where: str,
                  base_dir: Path) -> SourceSpec:
    _check_keys(raw, ("mode", "fixture_dir", "base_url", "key_env"), where)
    mode = _typed(raw, "mode", str, where, None)
    if mode not in SOURCE_MODES:
        raise ConfigError(f"{where}.mode must be one of {SOURCE_MODES}, got {mode!r}")
    key_env = _typed(raw, "key_env", str, where, None)
    spec = SourceSpec(
        mode=mode,
        fixture_dir=_resolve(_typed(raw, "fixture_dir", str, where, None), base_dir),
        base_url=_typed(raw, "base_url", str, where, None),
        key_env=_env_name(key_env, f"{where}.key_env") if key_env else None,
    )
    if mode == "fixtures" and not spec.fixture_dir:
        raise ConfigError(f"{where}: fixtures mode requires fixture_dir")
    if mode == "live" and kind is SourceKind.WEB_SEARCH and not spec.base_url:
        raise ConfigError(f"{where}: live web search requires base_url")
    return spec


def _parse_retrieval(raw: Mapping[str, Any], where: str) -> RetrievalConfig:
    keys = ("n_queries", "k_docs", "m_prime", "weights",
            "recency_half_life_days", "dedup_jaccard", "per_source_timeout",
            "reference_time")
    _check_keys(raw, keys, where)
    defaults = RetrievalConfig()
    weights = defaults.weights
    if "weights" in raw:
        raw_weights = _mapping(raw["weights"], f"{where}.weights")
        names = ("similarity", "keyword", "reputation", "recency")
        _check_keys(raw_weights, names, f"{where}.weights")
        weights = ScoreWeights(**{
            name: _typed(raw_weights, name, float, f"{where}.weights",
                         getattr(weights, name))
            for name in names
        })
    return RetrievalConfig(
        n_queries=_typed(raw, "n_queries", int, where, defaults.n_queries),
        k_docs=_typed(raw, "k_docs", int, where, defaults.k_docs),
        m_prime=_typed(raw, "m_prime", int, where, defaults.m_prime),
        weights=weights,
        recency_half_life_days=_typed(raw, "recency_half_life_days", float,
                                      where, defaults.recency_half_life_days),
        dedup_jaccard=_typed(raw, "dedup_jaccard", float, where,
                             defaults.dedup_jaccard),
        per_source_timeout=_typed(raw, "per_source_timeout", float, where,
                                  defaults.per_source_timeout),
        reference_time=_typed(raw, "reference_time", int, where,
                              defaults.reference_time),
    )


def parse_config(data: Mapping[str, Any], base_dir: Path) -> ServiceConfig:
    """Validate a parsed YAML document into a ServiceConfig."""
    sections = ("server", "persistence", "cache", "retrieval", "extraction",
                "sandbox", "budgets", "build", "watch", "backends", "sources")
    _check_keys(data, sections, "config")
    config = ServiceConfig()

    server = _mapping(data.get("server"), "server")
    _check_keys(server, ("host", "port", "frontend_dir"), "server")
    config = replace(
        config,
        host=_typed(server, "host", str, "server", config.host),
        port=_typed(server, "port", int, "server", config.port),
        frontend_dir=_resolve(
            _typed(server, "frontend_dir", str, "server", None), base_dir
        ),
    )

    persistence = _mapping(data.get("persistence"), "persistence")
    _check_keys(persistence, ("session_log",), "persistence")
    config = replace(config, session_log=_resolve(
        _typed(persistence, "session_log", str, "persistence", None), base_dir
    ))

    cache = _mapping(data.get("cache"), "cache")
    _check_keys(cache, ("enabled", "path", "ttl_s"), "cache")
    config = replace(
        config,
        cache_enabled=_typed(cache, "enabled", bool, "cache", config.cache_enabled),
        cache_path=_resolve(_typed(cache, "path", str, "cache", None), base_dir),
        cache_ttl_s=_typed(cache, "ttl_s", float, "cache", config.cache_ttl_s),
    )

    if "retrieval" in data:
        config = replace(config, retrieval=_parse_retrieval(
            _mapping(data["retrieval"], "retrieval"), "retrieval"
        ))

    extraction = _mapping(data.get("extraction"), "extraction")
    _check_keys(extraction, ("k", "max_snippet_bytes"), "extraction")
    if extraction:
        defaults = ExtractionConfig()
        config = replace(config, extraction=ExtractionConfig(
            k=_typed(extraction, "k", int, "extraction", defaults.k),
            max_snippet_bytes=_typed(extraction, "max_snippet_bytes", int,
                                     "extraction", defaults.max_snippet_bytes),
        ))

    sandbox = _mapping(data.get("sandbox"), "sandbox")
    _check_keys(sandbox, ("wall_clock_limit_s", "network_disabled"), "sandbox")
    if sandbox:
        defaults = SandboxSpec()
        config = replace(config, sandbox=SandboxSpec(
            wall_clock_limit_s=_typed(sandbox, "wall_clock_limit_s", float,
                                      "sandbox", defaults.wall_clock_limit_s),
            network_disabled=_typed(sandbox, "network_disabled", bool,
                                    "sandbox", defaults.network_disabled),
        ))

    budgets = _mapping(data.get("budgets"), "budgets")
    _check_keys(budgets, ("hypothesis", "synthesis"), "budgets")
    config = replace(
        config,
        hypothesis_budget=_typed(budgets, "hypothesis", int, "budgets",
                                 config.hypothesis_budget),
        synthesis_budget=_typed(budgets, "synthesis", int, "budgets",
                                config.synthesis_budget),
    )

    build = _mapping(data.get("build"), "build")
    _check_keys(build, ("timeout_s",), "build")
    config = replace(config, build_timeout_s=_typed(
        build, "timeout_s", float, "build", config.build_timeout_s
    ))

    watch = _mapping(data.get("watch"), "watch")
    _check_keys(watch, ("debounce_ms",), "watch")
    config = replace(config, debounce_ms=_typed(
        watch, "debounce_ms", int, "watch", config.debounce_ms
    ))

    backends = _mapping(data.get("backends"), "backends")
    _check_keys(backends, ("hypothesis", "synthesis"), "backends")
    if "hypothesis" in backends:
        config = replace(config, hypothesis_backend=_parse_backend(
            _mapping(backends["hypothesis"], "backends.hypothesis"),
            "backends.hypothesis", base_dir,
        ))
    if "synthesis" in backends:
        config = replace(config, synthesis_backend=_parse_backend(
            _mapping(backends["synthesis"], "backends.synthesis"),
            "backends.synthesis", base_dir,
        ))

    raw_sources = _mapping(data.get("sources"), "sources")
    kinds = {kind.value: kind for kind in SourceKind}
    _check_keys(raw_sources, tuple(kinds), "sources")
    sources = {}
    for name, raw in raw_sources.items():
        kind = kinds[name]
        sources[kind] = _parse_source(
            _mapping(raw, f"sources.{name}"), kind, f"sources.{name}", base_dir
        )
    return replace(config, sources=sources)


def load_config(path: Path | str) -> ServiceConfig:
    """Read and validate a YAML config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    return parse_config(_mapping(data, "config"), path.parent)


def _build_backend(spec: BackendSpec) -> GeneratorBackend:
    if spec.kind == "replay":
        return ReplayBackend(spec.fixture_dir)
    return HttpBackend(spec.url, spec.model, api_key_env=spec.key_env)


def _build_source(kind: SourceKind, spec: SourceSpec) -> SourceClient:
    if spec.mode == "fixtures":
        return FixtureSourceClient(kind, spec.fixture_dir)
    extra: dict[str, Any] = {}
    if spec.base_url:
        extra["base_url"] = spec.base_url
    if spec.key_env:
        extra["api_key_env"] = spec.key_env
    if kind is SourceKind.STACK_OVERFLOW:
        return StackOverflowClient(**extra)
    if kind is SourceKind.GITHUB_ISSUES:
        return GitHubIssuesClient(**extra)
    return WebSearchClient(**extra)


def build_services(config: ServiceConfig) -> tuple[PipelineServices, Optional[RetrievalCache]]:
    """Construct backends, source clients, and the optional cache."""
    cache = None
    if config.cache_enabled:
        cache = RetrievalCache(path=config.cache_path, ttl_s=config.cache_ttl_s)
    clients: dict[SourceKind, SourceClient] = {}
    for kind, spec in config.sources.items():
        client = _build_source(kind, spec)
        if cache is not None:
            client = CachingSourceClient(client, cache)
        clients[kind] = client
    services = PipelineServices(
        hypothesis_backend=_build_backend(config.hypothesis_backend),
        synthesis_backend=_build_backend(config.synthesis_backend),
        source_clients=clients,
        retrieval=config.retrieval,
        extraction=config.extraction,
        hypothesis_budget=config.hypothesis_budget,
        synthesis_budget=config.synthesis_budget,
        build_timeout=config.build_timeout_s,
    )
    return services, cache
