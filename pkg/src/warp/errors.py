"""Shared exception types for the warp engine.

Every operational failure mode raised across the package lives here so
callers can catch one family (`WarpError`) or the precise condition.
"""

from __future__ import annotations


class WarpError(Exception):
    """Base class for all warp-specific failures."""


# --- capture / ingestion ---

class SpawnFailure(WarpError):
    """The build command could not be spawned (missing binary, bad cwd)."""


class UnknownLanguage(WarpError):
    """Neither the extension table nor the command table matched."""


# --- context extraction ---

class EmptySource(WarpError):
    """Source text was empty; no window can be extracted."""


# --- generation backends ---

class BackendUnavailable(WarpError):
    """The generation backend could not be reached or answered with a transport error."""


class ReplayMiss(BackendUnavailable):
    """The replay backend has no recorded completion for this prompt hash."""

    def __init__(self, prompt_hash: str, fixture_dir: str):
        super().__init__(f"no recorded completion for prompt hash {prompt_hash} in {fixture_dir}")
        self.prompt_hash = prompt_hash
        self.fixture_dir = fixture_dir


class MalformedCompletion(WarpError):
    """Completion text did not contain the required structure (after retry)."""


class BudgetTooSmall(WarpError):
    """The token budget cannot fit even the snippet-free prompt."""


# --- retrieval sources (non-fatal at pipeline level) ---

class SourceError(WarpError):
    """A search source failed; logged and treated as an empty result set."""


class SourceTimeout(SourceError):
    """A search source exceeded its per-source timeout."""


# --- diff engine ---

class DiffError(WarpError):
    """Base for unified-diff parse/apply failures."""


class DiffSyntaxError(DiffError):
    """Diff text violated the unified format."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class HunkCountMismatch(DiffError):
    """A hunk header's declared lengths disagree with its body."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ContextMismatch(DiffError):
    """Strict application failed: a context/remove line did not match the source."""

    def __init__(self, hunk_index: int, line: int, detail: str = ""):
        msg = f"hunk {hunk_index} does not apply at line {line}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.hunk_index = hunk_index
        self.line = line


# --- eval harness ---

class DatasetUnreadable(WarpError):
    """The benchmark file is missing or cannot be read."""


class ValidationError(WarpError):
    """A benchmark record violated an invariant; the record is rejected."""

    def __init__(self, record_id: str, reason: str):
        super().__init__(f"record {record_id!r}: {reason}")
        self.record_id = record_id
        self.reason = reason


class SandboxFailure(WarpError):
    """Sandbox infrastructure failed (distinct from the candidate failing to compile)."""


# --- service ---

class InvalidTransition(WarpError):
    """A session status change outside the declared transition graph."""

    def __init__(self, current: str, requested: str):
        super().__init__(f"cannot move session from {current} to {requested}")
        self.current = current
        self.requested = requested


class UnknownSolution(WarpError):
    """No session owns a solution with the requested id."""


class StaleFile(WarpError):
    """The target file changed on disk since the error was captured."""


class BindFailure(WarpError):
    """The API server could not bind its address."""


class ConfigError(WarpError):
    """Config file is malformed or contains unknown keys."""
