"""Build-command capture: spawn, stream both outputs, record timing."""

from __future__ import annotations

import hashlib
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import SpawnFailure


@dataclass(frozen=True)
class RawCapture:
    """One recorded run of a build command.

    stdout/stderr are decoded with surrogateescape so the original bytes
    are recoverable exactly; offsets in diagnostics index the re-encoded
    byte streams.
    """

    command_line: str
    exit_code: int
    stdout: str
    stderr: str
    started_at: int  # epoch milliseconds
    finished_at: int
    working_dir: str
    timed_out: bool = False

    def __post_init__(self):
        if self.finished_at < self.started_at:
            raise ValueError("finished_at precedes started_at")

    @property
    def capture_id(self) -> str:
        """Deterministic identifier derived from every field."""
        h = hashlib.sha256()
        for part in (self.command_line, str(self.exit_code), self.stdout, self.stderr,
                     str(self.started_at), str(self.finished_at), self.working_dir,
                     str(self.timed_out)):
            h.update(part.encode("utf-8", "surrogateescape"))
            h.update(b"\x00")
        return h.hexdigest()[:16]

    def stream_bytes(self, stream: str) -> bytes:
        text = self.stdout if stream == "stdout" else self.stderr
        return text.encode("utf-8", "surrogateescape")


def _decode(data: bytes) -> str:
    return data.decode("utf-8", "surrogateescape")


def capture_command(command_line: str, working_dir: str | Path,
                    timeout: float = 120.0) -> RawCapture:
    """Run a build command and capture both output streams concurrently.

    On timeout the child is terminated (then killed) and the partial
    capture is returned with timed_out=True.  A missing binary or
    working directory raises SpawnFailure.
    """
    if not command_line.strip():
        raise SpawnFailure("empty command line")
    wd = Path(working_dir)
    if not wd.is_dir():
        raise SpawnFailure(f"working directory does not exist: {wd}")

    argv = shlex.split(command_line)
    started = time.time()
    try:
        proc = subprocess.Popen(
            argv, cwd=str(wd),
            stdout=subprocess.PIPE, stderr=subprocess.PIPE,
        )
    except FileNotFoundError as exc:
        raise SpawnFailure(f"command not found: {argv[0]}") from exc
    except OSError as exc:
        raise SpawnFailure(str(exc)) from exc

    chunks: dict[str, bytes] = {}

    def drain(name: str, pipe):
        # a dedicated reader per stream preserves each stream's own ordering
        chunks[name] = pipe.read()
        pipe.close()

    readers = [
        threading.Thread(target=drain, args=("stdout", proc.stdout), daemon=True),
        threading.Thread(target=drain, args=("stderr", proc.stderr), daemon=True),
    ]
    for t in readers:
        t.start()

    timed_out = False
    try:
        exit_code = proc.wait(timeout=timeout)
    except subprocess.TimeoutExpired:
        timed_out = True
        proc.terminate()
        try:
            exit_code = proc.wait(timeout=2.0)
        except subprocess.TimeoutExpired:
            proc.kill()
            exit_code = proc.wait()
    for t in readers:
        t.join(timeout=5.0)
    finished = time.time()

    return RawCapture(
        command_line=command_line,
        exit_code=exit_code,
        stdout=_decode(chunks.get("stdout", b"")),
        stderr=_decode(chunks.get("stderr", b"")),
        started_at=int(started * 1000),
        finished_at=max(int(finished * 1000), int(started * 1000)),
        working_dir=str(wd),
        timed_out=timed_out,
    )
