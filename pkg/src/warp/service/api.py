"""HTTP API and server-push event stream for the repair service.

Routes are thin adapters over the session store and pipeline
operations; every domain failure maps to a structured error payload
`{"error": {"code", "message"}}` with a conventional status code.
`GET /api/events` is a Server-Sent Events stream carrying one object
per session stage transition.
"""

from __future__ import annotations

import json
import logging
import queue
import socket
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator, Optional

import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from ..errors import (
    BindFailure,
    ContextMismatch,
    InvalidTransition,
    StaleFile,
    UnknownSolution,
)
from .config import ServiceConfig, build_services
from .pipeline import (
    PipelineServices,
    apply_solution,
    execute_build,
    reject_solution,
)
from .serialize import snippet_to_record, solution_to_record
from .session import Session, SessionStatus, SessionStore

__all__ = ["ServiceHandle", "create_app", "serve_api", "session_record"]

logger = logging.getLogger("warp.service.api")

DEFAULT_KEEPALIVE_S = 15.0

_STARTABLE = frozenset(
    {SessionStatus.IDLE, SessionStatus.APPLIED, SessionStatus.REJECTED}
)


def _error(status_code: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content={"error": {"code": code, "message": message}},
    )


def _solution_records(session: Session) -> list[dict[str, Any]]:
    records = []
    for solution in session.solutions:
        record = solution_to_record(solution)
        record["id"] = session.solution_id(solution.rank)
        records.append(record)
    return records


def session_record(session: Session) -> dict[str, Any]:
    """The API view of a session (everything but raw history payloads)."""
    return {
        "id": session.id,
        "command_line": session.command_line,
        "working_dir": session.working_dir,
        "status": session.status.value,
        "detail": session.last_detail,
        "target_file": session.target_file,
        "applied_solution": session.applied_solution,
        "stage_timings": dict(session.stage_timings),
        "solutions": _solution_records(session),
        "error": (
            {
                "error_id": session.error_context.error_id.id,
                "message": session.error_context.raw_message,
                "file_path": session.error_context.file_path,
                "line": session.error_context.line,
                "language": session.error_context.language.value,
                "snippet": session.error_context.ast_window.snippet,
                "snippet_start": session.error_context.ast_window.line_range[0],
            }
            if session.error_context
            else None
        ),
        "history": [event.to_record() for event in session.history],
    }


def create_app(
    store: SessionStore,
    services: PipelineServices,
    frontend_dir: Optional[str] = None,
    keepalive_s: float = DEFAULT_KEEPALIVE_S,
) -> FastAPI:
    app = FastAPI(title="warp", docs_url=None, redoc_url=None)
    run_locks: dict[str, threading.Lock] = {}
    guard = threading.Lock()

    def run_lock(session_id: str) -> threading.Lock:
        with guard:
            return run_locks.setdefault(session_id, threading.Lock())

    def launch_build(session: Session, lock: threading.Lock, wait: bool):
        """Run one build round holding the session's run lock.

        The lock is acquired by the caller; it is released here so a
        background round keeps excluding others until it finishes.
        """
        def run_round():
            try:
                execute_build(session, services, store)
            except Exception as exc:  # safety net: a session never wedges
                logger.exception("build round failed for %s", session.id)
                try:
                    store.transition(
                        session, SessionStatus.IDLE, f"internal error: {exc}"
                    )
                except InvalidTransition:
                    pass
            finally:
                lock.release()

        if wait:
            run_round()
        else:
            threading.Thread(target=run_round, daemon=True).start()

    # --- sessions ---

    @app.get("/api/sessions")
    def list_sessions():
        return {"sessions": [session_record(s) for s in store.list_sessions()]}

    @app.post("/api/sessions")
    async def create_session(request: Request):
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return _error(400, "bad_request", "body must be a JSON object")
        if not isinstance(payload, dict) or not payload.get("command_line"):
            return _error(400, "bad_request", "command_line is required")
        session = store.create_session(
            payload["command_line"], payload.get("working_dir", ".")
        )
        if payload.get("start", True):
            lock = run_lock(session.id)
            lock.acquire()
            launch_build(session, lock, wait=bool(payload.get("wait", False)))
        return JSONResponse(status_code=201, content=session_record(session))

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return session_record(session)

    @app.get("/api/sessions/{session_id}/solutions")
    def get_solutions(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return {"session_id": session_id, "solutions": _solution_records(session)}

    @app.post("/api/sessions/{session_id}/build")
    async def trigger_build(session_id: str, request: Request):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        if session.status not in _STARTABLE:
            return _error(
                409, "invalid_state",
                f"cannot rebuild while {session.status.value}",
            )
        body = await request.body()
        wait = bool(json.loads(body).get("wait", False)) if body else False
        lock = run_lock(session_id)
        if not lock.acquire(blocking=False):
            return _error(409, "busy", "a build round is already running")
        launch_build(session, lock, wait=wait)
        if wait:
            return session_record(session)
        return JSONResponse(status_code=202, content=session_record(session))

    # --- solutions ---

    def resolve_solution(solution_id: str):
        found = store.find_solution(solution_id)
        if found is None:
            return None, _error(
                404, "unknown_solution", f"no solution {solution_id!r}"
            )
        return found, None

    @app.get("/api/solutions/{solution_id}/evidence")
    def get_evidence(solution_id: str):
        found, failure = resolve_solution(solution_id)
        if failure is not None:
            return failure
        session, solution = found
        snippets = []
        if session.evidence is not None:
            for citation in solution.citations:
                snippet = session.evidence.by_id(citation)
                if snippet is not None:
                    snippets.append(snippet_to_record(snippet))
        return {"solution_id": solution_id, "evidence": snippets}

    @app.post("/api/solutions/{solution_id}/apply")
    def apply(solution_id: str):
        found, failure = resolve_solution(solution_id)
        if failure is not None:
            return failure
        session, _ = found
        try:
            apply_solution(store, session, solution_id)
        except InvalidTransition as exc:
            return _error(409, "invalid_state", str(exc))
        except StaleFile as exc:
            return _error(409, "stale_file", str(exc))
        except ContextMismatch as exc:
            return _error(409, "context_mismatch", str(exc))
        except UnknownSolution as exc:
            return _error(404, "unknown_solution", str(exc))
        return session_record(session)

    @app.post("/api/solutions/{solution_id}/reject")
    def reject(solution_id: str):
        found, failure = resolve_solution(solution_id)
        if failure is not None:
            return failure
        session, _ = found
        try:
            reject_solution(store, session)
        except InvalidTransition as exc:
            return _error(409, "invalid_state", str(exc))
        return session_record(session)

    # --- events ---

    @app.get("/api/events")
    def events():
        def stream() -> Iterator[str]:
            subscriber = store.subscribe()
            try:
                while True:
                    try:
                        payload = subscriber.get(timeout=keepalive_s)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"data: {json.dumps(payload, sort_keys=True)}\n\n"
            finally:
                store.unsubscribe(subscriber)

        return StreamingResponse(
            stream(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    if frontend_dir is not None:
        if Path(frontend_dir).is_dir():
            app.mount(
                "/", StaticFiles(directory=frontend_dir, html=True),
                name="frontend",
            )
        else:
            logger.warning("frontend dir %s missing; not mounted", frontend_dir)

    return app


@dataclass
class ServiceHandle:
    """A running API server; `stop()` shuts it down and closes the store."""

    server: uvicorn.Server
    thread: threading.Thread
    store: SessionStore
    host: str
    port: int

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=10.0)
        self.store.close()


def serve_api(config: ServiceConfig) -> ServiceHandle:
    """Start the API server in a background thread.

    Raises BindFailure when the address is taken or cannot be bound.
    `port: 0` picks a free port (reported on the returned handle).
    """
    services, _ = build_services(config)
    store = SessionStore(path=config.session_log)
    app = create_app(store, services, frontend_dir=config.frontend_dir)
    try:
        sock = socket.create_server((config.host, config.port))
    except OSError as exc:
        raise BindFailure(
            f"cannot bind {config.host}:{config.port}: {exc}"
        ) from exc
    port = sock.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(
        app, host=config.host, port=port, log_level="warning",
    ))
    thread = threading.Thread(
        target=server.run, kwargs={"sockets": [sock]}, daemon=True,
    )
    thread.start()
    deadline = time.monotonic() + 10.0
    while not server.started and thread.is_alive():
        if time.monotonic() > deadline:
            raise BindFailure("server did not start within 10 s")
        time.sleep(0.01)
    if not thread.is_alive() and not server.started:
        raise BindFailure("server exited during startup")
    return ServiceHandle(
        server=server, thread=thread, store=store,
        host=config.host, port=port,
    )
