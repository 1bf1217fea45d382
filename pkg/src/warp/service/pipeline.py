"""Pipeline orchestration: capture to ranked solutions inside a session.

`run_pipeline` drives one repair round.  The hypothesis call and the
first retrieval round run concurrently; the keyword query round waits
for the hypothesis.  Per-stage wall time lands in the session's stage
timings: deterministic work (`ingest`, `context`, `queries`, `scoring`)
separately from backend and network waits (`hypothesis_wait`,
`retrieval_wait`, `synthesis_wait`), so the part that must stay fast is
auditable on every run.

Degradation order on stage failure: no usable diagnostic or no
hypothesis ends the round with an explanatory event and Idle; empty
evidence or a synthesis failure falls back to the hypothesis-only
solution.  A session therefore never wedges.
"""

from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional

from ..context import ErrorContext, ExtractionConfig, build_error_context
from ..diagnostics import (
    Diagnostic,
    RawCapture,
    capture_command,
    first_error,
    parse_diagnostics,
    should_trigger_repair,
)
from ..errors import (
    BackendUnavailable,
    BudgetTooSmall,
    EmptySource,
    InvalidTransition,
    MalformedCompletion,
    SpawnFailure,
    StaleFile,
    UnknownLanguage,
    UnknownSolution,
)
from ..diffs import apply_diff, format_diff
from ..hypothesis import (
    GeneratorBackend,
    Hypothesis,
    generate_hypothesis,
    render_hypothesis_prompt,
)
from ..retrieval import (
    EvidenceSet,
    RetrievalConfig,
    SearchQuery,
    SourceKind,
    formulate_queries,
    gather_evidence,
)
from ..retrieval.sources import SearchResultDoc, SourceClient, request_key, search_source
from ..synthesis import (
    FinalSolution,
    hypothesis_only,
    rank_solutions,
    render_synthesis_prompt,
    synthesize,
)
from .session import Session, SessionStatus, SessionStore

__all__ = [
    "DETERMINISTIC_STAGES",
    "PipelineServices",
    "StageTimer",
    "analyze_context",
    "apply_solution",
    "deterministic_stage_ms",
    "execute_build",
    "reject_solution",
    "run_pipeline",
]

logger = logging.getLogger("warp.service.pipeline")

# Stage-timing buckets that exclude every backend and network wait.
DETERMINISTIC_STAGES = ("ingest", "context", "queries", "scoring")


@dataclass
class PipelineServices:
    """Everything a repair round needs beyond the session itself."""

    hypothesis_backend: GeneratorBackend
    synthesis_backend: GeneratorBackend
    source_clients: Mapping[SourceKind, SourceClient] = field(default_factory=dict)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    hypothesis_budget: int = 2048
    synthesis_budget: int = 4096
    build_timeout: float = 120.0
    clock: Callable[[], float] = time.monotonic


class StageTimer:
    """Accumulates wall time per stage; reentrant per stage label."""

    def __init__(self, clock: Callable[[], float] = time.monotonic):
        self._clock = clock
        self._open: dict[str, float] = {}
        self._seconds: dict[str, float] = {}

    def start(self, stage: str) -> None:
        self._open[stage] = self._clock()

    def stop(self, stage: str) -> None:
        elapsed = self._clock() - self._open.pop(stage)
        self._seconds[stage] = self._seconds.get(stage, 0.0) + elapsed

    def totals_ms(self) -> dict[str, int]:
        return {
            stage: int(round(seconds * 1000))
            for stage, seconds in self._seconds.items()
        }


def deterministic_stage_ms(timings: Mapping[str, int]) -> int:
    """Total across the non-wait stages of a recorded round."""
    return sum(timings.get(stage, 0) for stage in DETERMINISTIC_STAGES)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8", "surrogateescape")).hexdigest()


def _resolve_target(capture: RawCapture, diag: Diagnostic) -> Path:
    path = Path(diag.file_path)
    if not path.is_absolute():
        path = Path(capture.working_dir) / path
    return path


def _run_queries(
    queries: list[SearchQuery],
    services: PipelineServices,
    already_run: set[str],
) -> list[SearchResultDoc]:
    """Dispatch queries concurrently, skipping repeated request keys and
    targets without a configured client.  Source failures degrade to
    empty results inside `search_source`."""
    pending: list[tuple[SearchQuery, SourceClient]] = []
    for query in queries:
        key = request_key(query.target, query.text)
        if key in already_run:
            continue
        client = services.source_clients.get(query.target)
        if client is None:
            logger.warning("no client for %s; skipping %r",
                           query.target.value, query.text)
            continue
        already_run.add(key)
        pending.append((query, client))
    if not pending:
        return []
    docs: list[SearchResultDoc] = []
    with ThreadPoolExecutor(max_workers=len(pending)) as pool:
        futures = [
            pool.submit(search_source, query, client, services.retrieval)
            for query, client in pending
        ]
        for future in futures:
            docs.extend(future.result())
    return docs


def analyze_context(
    context: ErrorContext,
    services: PipelineServices,
    timer: Optional[StageTimer] = None,
) -> tuple[tuple[FinalSolution, ...], Optional[EvidenceSet], Optional[str]]:
    """Hypothesis, retrieval, and synthesis for one extracted context.

    Returns (ranked solutions, evidence, failure detail); exactly one of
    solutions/failure is populated.  The hypothesis backend call runs
    concurrently with the first retrieval round; the keyword query round
    runs once the hypothesis is in.
    """
    timer = timer or StageTimer(services.clock)
    already_run: set[str] = set()
    with ThreadPoolExecutor(max_workers=1) as pool:
        hypo_future = pool.submit(_hypothesis_stage, context, services, timer)
        timer.start("queries")
        immediate = formulate_queries(context, None, services.retrieval)
        timer.stop("queries")
        timer.start("retrieval_wait")
        docs = _run_queries(immediate, services, already_run)
        timer.stop("retrieval_wait")
        try:
            hypo = hypo_future.result()
        except (BackendUnavailable, MalformedCompletion, BudgetTooSmall) as exc:
            return (), None, f"hypothesis generation failed: {exc}"

    timer.start("queries")
    keyword_round = formulate_queries(context, hypo, services.retrieval)
    timer.stop("queries")
    timer.start("retrieval_wait")
    docs.extend(_run_queries(keyword_round, services, already_run))
    timer.stop("retrieval_wait")

    timer.start("scoring")
    evidence = gather_evidence(context, docs, services.retrieval)
    timer.stop("scoring")

    solution = _synthesis_stage(context, hypo, evidence, services, timer)
    candidates = [solution]
    fallback = hypothesis_only(hypo)
    # Offer the raw hypothesis as an alternative when synthesis moved
    # away from it; identical fixes would just duplicate the card.
    if format_diff(solution.fix) != format_diff(fallback.fix):
        candidates.append(fallback)
    return rank_solutions(candidates), evidence, None


def _hypothesis_stage(
    context: ErrorContext, services: PipelineServices, timer: StageTimer
) -> Hypothesis:
    timer.start("hypothesis_wait")
    try:
        prompt = render_hypothesis_prompt(context, services.hypothesis_budget)
        return generate_hypothesis(prompt, services.hypothesis_backend)
    finally:
        timer.stop("hypothesis_wait")


def _synthesis_stage(
    context: ErrorContext,
    hypo: Hypothesis,
    evidence: EvidenceSet,
    services: PipelineServices,
    timer: StageTimer,
) -> FinalSolution:
    if not evidence.snippets:
        logger.info("no evidence gathered; emitting hypothesis-only solution")
        return hypothesis_only(hypo)
    timer.start("synthesis_wait")
    try:
        prompt = render_synthesis_prompt(
            context, hypo, evidence, services.synthesis_budget
        )
        return synthesize(prompt, hypo, services.synthesis_backend, evidence)
    except (BackendUnavailable, BudgetTooSmall) as exc:
        logger.warning("synthesis degraded to hypothesis-only: %s", exc)
        return hypothesis_only(hypo)
    finally:
        timer.stop("synthesis_wait")


def _flush_timings(store: SessionStore, session: Session, timer: StageTimer) -> None:
    for stage, elapsed_ms in timer.totals_ms().items():
        store.record_stage(session, stage, elapsed_ms)


def _fail_round(store: SessionStore, session: Session, detail: str) -> Session:
    logger.warning("session %s: %s", session.id, detail)
    store.transition(session, SessionStatus.IDLE, detail)
    return session


def run_pipeline(
    session: Session,
    capture: RawCapture,
    services: PipelineServices,
    store: SessionStore,
) -> Session:
    """One repair round over a finished build capture.

    The session must be Building (the capture just finished).  Ends in
    Idle (clean build or explanatory failure) or AwaitingDecision.
    """
    if capture.command_line != session.command_line:
        raise ValueError("capture does not belong to this session")
    timer = StageTimer(services.clock)

    timer.start("ingest")
    diagnostics = parse_diagnostics(capture)
    repair = should_trigger_repair(capture, diagnostics)
    diag = first_error(diagnostics)
    timer.stop("ingest")

    if not repair:
        _flush_timings(store, session, timer)
        detail = ("build succeeded" if capture.exit_code == 0
                  else "build failed without a recognized error")
        store.transition(session, SessionStatus.IDLE, detail)
        return session

    store.transition(
        session, SessionStatus.ANALYZING,
        f"{diag.file_path}:{diag.line}: {diag.message}",
    )

    timer.start("context")
    target = _resolve_target(capture, diag)
    try:
        source = target.read_text(encoding="utf-8", errors="surrogateescape")
    except OSError as exc:
        timer.stop("context")
        _flush_timings(store, session, timer)
        return _fail_round(store, session, f"cannot read {target}: {exc}")
    target_hash = _sha256(source)
    try:
        context = build_error_context(
            capture, diag, source, capture.working_dir, services.extraction
        )
    except (UnknownLanguage, EmptySource) as exc:
        timer.stop("context")
        _flush_timings(store, session, timer)
        return _fail_round(store, session, f"context extraction failed: {exc}")
    timer.stop("context")

    solutions, evidence, failure = analyze_context(context, services, timer)
    _flush_timings(store, session, timer)
    if failure is not None:
        return _fail_round(store, session, failure)
    store.transition(
        session, SessionStatus.AWAITING_DECISION,
        f"{len(solutions)} ranked solution(s)",
        context=context,
        evidence=evidence,
        solutions=solutions,
        target_file=str(target),
        target_hash=target_hash,
    )
    return session


def execute_build(
    session: Session,
    services: PipelineServices,
    store: SessionStore,
) -> Session:
    """Run the session's build command, then one pipeline round."""
    store.transition(session, SessionStatus.BUILDING, session.command_line)
    try:
        capture = capture_command(
            session.command_line, session.working_dir,
            timeout=services.build_timeout,
        )
    except SpawnFailure as exc:
        return _fail_round(store, session, f"build could not start: {exc}")
    return run_pipeline(session, capture, services, store)


def apply_solution(
    store: SessionStore, session: Session, solution_id: str
) -> FinalSolution:
    """Patch the captured file on disk and mark the session Applied.

    The write happens only if the file still hashes to its captured
    content; anything else is StaleFile and the session stays put.
    """
    if session.status is not SessionStatus.AWAITING_DECISION:
        raise InvalidTransition(session.status.value, SessionStatus.APPLIED.value)
    solution = session.find_solution(solution_id)
    if solution is None:
        raise UnknownSolution(f"session {session.id} has no solution {solution_id!r}")
    target = Path(session.target_file)
    try:
        source = target.read_text(encoding="utf-8", errors="surrogateescape")
    except OSError as exc:
        raise StaleFile(f"cannot re-read {target}: {exc}") from exc
    if _sha256(source) != session.target_hash:
        raise StaleFile(f"{target} changed since the error was captured")
    patched = apply_diff(source, solution.fix)
    target.write_text(patched, encoding="utf-8", errors="surrogateescape")
    store.transition(
        session, SessionStatus.APPLIED, f"applied {solution_id}",
        applied_solution=solution_id,
    )
    return solution


def reject_solution(store: SessionStore, session: Session) -> None:
    """Decline the offered solutions; the session awaits the next build."""
    if session.status is not SessionStatus.AWAITING_DECISION:
        raise InvalidTransition(session.status.value, SessionStatus.REJECTED.value)
    store.transition(session, SessionStatus.REJECTED, "solutions rejected")
