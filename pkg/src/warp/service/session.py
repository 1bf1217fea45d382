"""Session lifecycle, the status machine, and the persistent event store.

A session tracks one wrapped build command through repeated repair
rounds.  Every status change is an event; events append to an in-memory
history and, when a path is configured, to a single JSONL file that also
receives periodic full-state snapshot lines.  Restarting a store on the
same file replays the log and restores every session, including those
parked in AwaitingDecision with their solutions and evidence.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterator, Mapping, Optional

from ..context import ErrorContext
from ..errors import InvalidTransition
from ..retrieval import EvidenceSet
from ..synthesis import FinalSolution
from .serialize import (
    context_to_record,
    evidence_to_record,
    parse_context,
    parse_evidence,
    parse_solution,
    solution_to_record,
)

__all__ = [
    "ALLOWED_TRANSITIONS",
    "Session",
    "SessionEvent",
    "SessionStatus",
    "SessionStore",
]

logger = logging.getLogger("warp.service.session")

DEFAULT_SNAPSHOT_INTERVAL = 100


class SessionStatus(str, Enum):
    IDLE = "Idle"
    BUILDING = "Building"
    ANALYZING = "Analyzing"
    AWAITING_DECISION = "AwaitingDecision"
    APPLIED = "Applied"
    REJECTED = "Rejected"


# Analyzing -> Idle is the explanatory-failure path: when no solution can
# be produced at all, the session reports why and becomes ready for the
# next build instead of wedging.
ALLOWED_TRANSITIONS: Mapping[SessionStatus, frozenset[SessionStatus]] = {
    SessionStatus.IDLE: frozenset({SessionStatus.BUILDING}),
    SessionStatus.BUILDING: frozenset({SessionStatus.IDLE, SessionStatus.ANALYZING}),
    SessionStatus.ANALYZING: frozenset(
        {SessionStatus.AWAITING_DECISION, SessionStatus.IDLE}
    ),
    SessionStatus.AWAITING_DECISION: frozenset(
        {SessionStatus.APPLIED, SessionStatus.REJECTED}
    ),
    SessionStatus.APPLIED: frozenset({SessionStatus.BUILDING}),
    SessionStatus.REJECTED: frozenset({SessionStatus.BUILDING}),
}

_DECIDED = frozenset(
    {SessionStatus.AWAITING_DECISION, SessionStatus.APPLIED, SessionStatus.REJECTED}
)


@dataclass(frozen=True)
class SessionEvent:
    """One entry in a session's append-only history."""

    session_id: str
    seq: int
    kind: str  # "created" | "status" | "stage"
    at_ms: int
    status: Optional[SessionStatus] = None
    stage: Optional[str] = None
    elapsed_ms: Optional[int] = None
    detail: str = ""

    def to_record(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "session_id": self.session_id,
            "seq": self.seq,
            "at_ms": self.at_ms,
            "status": self.status.value if self.status else None,
            "stage": self.stage,
            "elapsed_ms": self.elapsed_ms,
            "detail": self.detail,
        }


def _parse_event(record: Mapping[str, Any]) -> SessionEvent:
    return SessionEvent(
        session_id=record["session_id"],
        seq=record["seq"],
        kind=record["kind"],
        at_ms=record["at_ms"],
        status=SessionStatus(record["status"]) if record.get("status") else None,
        stage=record.get("stage"),
        elapsed_ms=record.get("elapsed_ms"),
        detail=record.get("detail", ""),
    )


@dataclass
class Session:
    """Mutable aggregate for one wrapped build command.

    Mutations go through `SessionStore`; reading is safe from any
    thread because fields are replaced, never edited in place.
    """

    id: str
    command_line: str
    working_dir: str
    status: SessionStatus = SessionStatus.IDLE
    error_context: Optional[ErrorContext] = None
    evidence: Optional[EvidenceSet] = None
    solutions: tuple[FinalSolution, ...] = ()
    target_file: Optional[str] = None
    target_hash: Optional[str] = None
    applied_solution: Optional[str] = None
    last_detail: str = ""
    stage_timings: dict[str, int] = field(default_factory=dict)
    history: list[SessionEvent] = field(default_factory=list)

    def solution_id(self, rank: int) -> str:
        return f"{self.id}:{rank}"

    def find_solution(self, solution_id: str) -> Optional[FinalSolution]:
        for solution in self.solutions:
            if self.solution_id(solution.rank) == solution_id:
                return solution
        return None

    def check_invariants(self) -> None:
        populated = bool(self.solutions)
        if populated != (self.status in _DECIDED):
            raise ValueError(
                f"session {self.id}: solutions populated={populated} "
                f"inconsistent with status {self.status.value}"
            )


def _session_to_record(session: Session) -> dict[str, Any]:
    return {
        "id": session.id,
        "command_line": session.command_line,
        "working_dir": session.working_dir,
        "status": session.status.value,
        "context": (
            context_to_record(session.error_context)
            if session.error_context
            else None
        ),
        "evidence": (
            evidence_to_record(session.evidence) if session.evidence else None
        ),
        "solutions": [solution_to_record(s) for s in session.solutions],
        "target_file": session.target_file,
        "target_hash": session.target_hash,
        "applied_solution": session.applied_solution,
        "last_detail": session.last_detail,
        "stage_timings": dict(session.stage_timings),
        "history": [event.to_record() for event in session.history],
    }


def _parse_session(record: Mapping[str, Any]) -> Session:
    return Session(
        id=record["id"],
        command_line=record["command_line"],
        working_dir=record["working_dir"],
        status=SessionStatus(record["status"]),
        error_context=(
            parse_context(record["context"]) if record["context"] else None
        ),
        evidence=parse_evidence(record["evidence"]) if record["evidence"] else None,
        solutions=tuple(parse_solution(s) for s in record["solutions"]),
        target_file=record["target_file"],
        target_hash=record["target_hash"],
        applied_solution=record["applied_solution"],
        last_detail=record["last_detail"],
        stage_timings=dict(record["stage_timings"]),
        history=[_parse_event(e) for e in record["history"]],
    )


class SessionStore:
    """Owns sessions, enforces the status machine, and persists events.

    `path=None` keeps everything in memory (tests, one-shot runs).
    The clock is injectable and returns epoch milliseconds.
    """

    def __init__(
        self,
        path: Optional[Path | str] = None,
        clock: Optional[Callable[[], int]] = None,
        snapshot_interval: int = DEFAULT_SNAPSHOT_INTERVAL,
    ):
        if snapshot_interval < 1:
            raise ValueError("snapshot_interval must be >= 1")
        self._path = Path(path) if path is not None else None
        self._clock = clock or (lambda: int(time.time() * 1000))
        self._snapshot_interval = snapshot_interval
        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}
        self._next_id = 1
        self._events_since_snapshot = 0
        self._subscribers: list[queue.SimpleQueue] = []
        if self._path is not None and self._path.exists():
            self._recover()

    # --- read side ---

    def list_sessions(self) -> tuple[Session, ...]:
        with self._lock:
            return tuple(self._sessions.values())

    def get(self, session_id: str) -> Optional[Session]:
        with self._lock:
            return self._sessions.get(session_id)

    def find_solution(
        self, solution_id: str
    ) -> Optional[tuple[Session, FinalSolution]]:
        session_id = solution_id.rsplit(":", 1)[0]
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                return None
            solution = session.find_solution(solution_id)
            if solution is None:
                return None
            return session, solution

    # --- event stream ---

    def subscribe(self) -> queue.SimpleQueue:
        subscriber: queue.SimpleQueue = queue.SimpleQueue()
        with self._lock:
            self._subscribers.append(subscriber)
        return subscriber

    def unsubscribe(self, subscriber: queue.SimpleQueue) -> None:
        with self._lock:
            if subscriber in self._subscribers:
                self._subscribers.remove(subscriber)

    def _publish(self, event: SessionEvent) -> None:
        payload = {
            "session_id": event.session_id,
            "stage": event.status.value if event.status else event.stage,
            "timestamp": event.at_ms,
            "seq": event.seq,
            "detail": event.detail,
        }
        for subscriber in list(self._subscribers):
            subscriber.put(payload)

    # --- write side ---

    def create_session(self, command_line: str, working_dir: str) -> Session:
        if not command_line:
            raise ValueError("command_line must be non-empty")
        with self._lock:
            session = Session(
                id=f"sess-{self._next_id}",
                command_line=command_line,
                working_dir=working_dir,
            )
            self._next_id += 1
            self._sessions[session.id] = session
            event = SessionEvent(
                session_id=session.id,
                seq=1,
                kind="created",
                at_ms=self._clock(),
                detail=command_line,
            )
            session.history.append(event)
            self._append({
                **event.to_record(),
                "command_line": command_line,
                "working_dir": working_dir,
            })
            return session

    def transition(
        self,
        session: Session,
        status: SessionStatus,
        detail: str = "",
        *,
        context: Optional[ErrorContext] = None,
        evidence: Optional[EvidenceSet] = None,
        solutions: tuple[FinalSolution, ...] = (),
        target_file: Optional[str] = None,
        target_hash: Optional[str] = None,
        applied_solution: Optional[str] = None,
    ) -> SessionEvent:
        with self._lock:
            if status not in ALLOWED_TRANSITIONS[session.status]:
                raise InvalidTransition(session.status.value, status.value)
            if status is SessionStatus.AWAITING_DECISION and not solutions:
                raise ValueError("AwaitingDecision requires at least one solution")
            self._apply_transition(
                session,
                status,
                detail,
                context=context,
                evidence=evidence,
                solutions=solutions,
                target_file=target_file,
                target_hash=target_hash,
                applied_solution=applied_solution,
            )
            session.check_invariants()
            event = SessionEvent(
                session_id=session.id,
                seq=session.history[-1].seq + 1,
                kind="status",
                at_ms=self._clock(),
                status=status,
                detail=detail,
            )
            session.history.append(event)
            self._append({**event.to_record(), "payload": self._payload(session, status)})
            self._publish(event)
            return event

    def record_stage(
        self, session: Session, stage: str, elapsed_ms: int, detail: str = ""
    ) -> SessionEvent:
        with self._lock:
            session.stage_timings[stage] = elapsed_ms
            event = SessionEvent(
                session_id=session.id,
                seq=session.history[-1].seq + 1,
                kind="stage",
                at_ms=self._clock(),
                stage=stage,
                elapsed_ms=elapsed_ms,
                detail=detail,
            )
            session.history.append(event)
            self._append(event.to_record())
            return event

    def _apply_transition(
        self,
        session: Session,
        status: SessionStatus,
        detail: str,
        *,
        context: Optional[ErrorContext],
        evidence: Optional[EvidenceSet],
        solutions: tuple[FinalSolution, ...],
        target_file: Optional[str],
        target_hash: Optional[str],
        applied_solution: Optional[str],
    ) -> None:
        session.status = status
        session.last_detail = detail
        if status is SessionStatus.BUILDING:
            # A fresh round: everything from the previous error is stale.
            session.error_context = None
            session.evidence = None
            session.solutions = ()
            session.target_file = None
            session.target_hash = None
            session.applied_solution = None
            session.stage_timings = {}
        elif status is SessionStatus.AWAITING_DECISION:
            session.error_context = context
            session.evidence = evidence
            session.solutions = solutions
            session.target_file = target_file
            session.target_hash = target_hash
        elif status is SessionStatus.APPLIED:
            session.applied_solution = applied_solution

    def _payload(
        self, session: Session, status: SessionStatus
    ) -> Optional[dict[str, Any]]:
        if status is SessionStatus.AWAITING_DECISION:
            return {
                "context": (
                    context_to_record(session.error_context)
                    if session.error_context
                    else None
                ),
                "evidence": (
                    evidence_to_record(session.evidence)
                    if session.evidence
                    else None
                ),
                "solutions": [solution_to_record(s) for s in session.solutions],
                "target_file": session.target_file,
                "target_hash": session.target_hash,
            }
        if status is SessionStatus.APPLIED:
            return {"applied_solution": session.applied_solution}
        return None

    # --- persistence ---

    def _append(self, record: dict[str, Any]) -> None:
        if self._path is None:
            return
        with self._path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
        self._events_since_snapshot += 1
        if self._events_since_snapshot >= self._snapshot_interval:
            self._write_snapshot()

    def _write_snapshot(self) -> None:
        if self._path is None:
            return
        record = {
            "kind": "snapshot",
            "at_ms": self._clock(),
            "next_id": self._next_id,
            "sessions": [_session_to_record(s) for s in self._sessions.values()],
        }
        with self._path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
        self._events_since_snapshot = 0

    def _recover(self) -> None:
        records = []
        with self._path.open("r", encoding="utf-8") as handle:
            for number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError:
                    # Typically a line truncated by a crash mid-write.
                    logger.warning("skipping undecodable log line %d", number)
        start = 0
        for index, record in enumerate(records):
            if record.get("kind") == "snapshot":
                start = index
        if records and records[start].get("kind") == "snapshot":
            self._load_snapshot(records[start])
            start += 1
        for record in records[start:]:
            try:
                self._replay(record)
            except (KeyError, TypeError, ValueError) as exc:
                logger.warning("skipping malformed log record: %s", exc)

    def _load_snapshot(self, record: Mapping[str, Any]) -> None:
        self._next_id = record["next_id"]
        for session_record in record["sessions"]:
            session = _parse_session(session_record)
            self._sessions[session.id] = session

    def _replay(self, record: Mapping[str, Any]) -> None:
        kind = record.get("kind")
        if kind == "created":
            event = _parse_event(record)
            session = Session(
                id=record["session_id"],
                command_line=record["command_line"],
                working_dir=record["working_dir"],
            )
            session.history.append(event)
            self._sessions[session.id] = session
            suffix = session.id.rsplit("-", 1)[-1]
            self._next_id = max(self._next_id, int(suffix) + 1)
        elif kind == "status":
            event = _parse_event(record)
            session = self._sessions[event.session_id]
            payload = record.get("payload") or {}
            self._apply_transition(
                session,
                event.status,
                event.detail,
                context=(
                    parse_context(payload["context"])
                    if payload.get("context")
                    else None
                ),
                evidence=(
                    parse_evidence(payload["evidence"])
                    if payload.get("evidence")
                    else None
                ),
                solutions=tuple(
                    parse_solution(s) for s in payload.get("solutions", [])
                ),
                target_file=payload.get("target_file"),
                target_hash=payload.get("target_hash"),
                applied_solution=payload.get("applied_solution"),
            )
            session.check_invariants()
            session.history.append(event)
        elif kind == "stage":
            event = _parse_event(record)
            session = self._sessions[event.session_id]
            session.stage_timings[event.stage] = event.elapsed_ms
            session.history.append(event)
        else:
            raise ValueError(f"unknown log record kind {kind!r}")

    def close(self) -> None:
        with self._lock:
            if self._path is not None and self._events_since_snapshot:
                self._write_snapshot()

    def __enter__(self) -> "SessionStore":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def __iter__(self) -> Iterator[Session]:
        return iter(self.list_sessions())
