"""Service layer: sessions, caching, pipeline orchestration, config, API."""

from .adapter import (
    PROBE_COMMANDS,
    PROBE_WORKDIR,
    PipelineAdapter,
    instance_capture,
    instance_context,
)
from .api import ServiceHandle, create_app, serve_api, session_record
from .cache import DEFAULT_TTL_S, CacheEntry, CachingSourceClient, RetrievalCache
from .config import (
    BackendSpec,
    ServiceConfig,
    SourceSpec,
    build_services,
    load_config,
    parse_config,
)
from .pipeline import (
    DETERMINISTIC_STAGES,
    PipelineServices,
    StageTimer,
    analyze_context,
    apply_solution,
    deterministic_stage_ms,
    execute_build,
    reject_solution,
    run_pipeline,
)
from .serialize import (
    context_to_record,
    evidence_to_record,
    parse_context,
    parse_evidence,
    parse_snippet,
    parse_solution,
    snippet_to_record,
    solution_to_record,
)
from .session import (
    ALLOWED_TRANSITIONS,
    Session,
    SessionEvent,
    SessionStatus,
    SessionStore,
)
from .watch import DEFAULT_DEBOUNCE_MS, snapshot_tree, watch_loop

__all__ = [
    "ALLOWED_TRANSITIONS",
    "BackendSpec",
    "CacheEntry",
    "CachingSourceClient",
    "DEFAULT_DEBOUNCE_MS",
    "DEFAULT_TTL_S",
    "DETERMINISTIC_STAGES",
    "PROBE_COMMANDS",
    "PROBE_WORKDIR",
    "PipelineAdapter",
    "PipelineServices",
    "RetrievalCache",
    "ServiceConfig",
    "ServiceHandle",
    "Session",
    "SessionEvent",
    "SessionStatus",
    "SessionStore",
    "SourceSpec",
    "StageTimer",
    "analyze_context",
    "apply_solution",
    "build_services",
    "context_to_record",
    "create_app",
    "deterministic_stage_ms",
    "evidence_to_record",
    "execute_build",
    "instance_capture",
    "instance_context",
    "load_config",
    "parse_config",
    "parse_context",
    "parse_evidence",
    "parse_snippet",
    "parse_solution",
    "reject_solution",
    "run_pipeline",
    "serve_api",
    "session_record",
    "snapshot_tree",
    "snippet_to_record",
    "solution_to_record",
    "watch_loop",
]
