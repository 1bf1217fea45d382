"""Sandboxed compile/run checks for candidate fixes.

A check applies the candidate diff, writes the patched source to a
fresh scratch directory, and runs the per-language command under a
wall-clock limit with a scrubbed environment.  Interpreted Python is
compiled and run in one step; C-family code is compiled only.  Missing
toolchains are infrastructure failures (SandboxFailure), distinct from
a fix that simply does not compile.
"""

from __future__ import annotations

import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from ..diagnostics import LanguageId
from ..diffs import apply_diff
from ..errors import ContextMismatch, SandboxFailure
from .dataset import BenchmarkInstance

# {src} and {out} expand to scratch-relative paths.
DEFAULT_COMMANDS: Mapping[LanguageId, tuple[str, ...]] = {
    LanguageId.C: ("gcc", "-std=c11", "{src}", "-o", "{out}"),
    LanguageId.CPP: ("g++", "-std=c++17", "{src}", "-o", "{out}"),
    LanguageId.PYTHON: ("python3", "{src}"),
    LanguageId.GO: ("go", "build", "-o", "{out}", "{src}"),
}

SOURCE_NAMES: Mapping[LanguageId, str] = {
    LanguageId.C: "main.c",
    LanguageId.CPP: "main.cpp",
    LanguageId.PYTHON: "main.py",
    LanguageId.GO: "main.go",
}


@dataclass(frozen=True)
class SandboxSpec:
    wall_clock_limit_s: float = 30.0
    network_disabled: bool = True
    scratch_root: Optional[str] = None
    commands: Mapping[LanguageId, tuple[str, ...]] = field(
        default_factory=lambda: dict(DEFAULT_COMMANDS))

    def __post_init__(self):
        if self.wall_clock_limit_s <= 0:
            raise ValueError("wall_clock_limit_s must be positive")


@dataclass(frozen=True)
class CompileCheck:
    compiled: bool
    semantically_correct: Optional[bool]
    detail: str = ""


def _scrubbed_env(scratch: Path, spec: SandboxSpec) -> dict[str, str]:
    env = {
        "PATH": "/usr/local/bin:/usr/bin:/bin",
        "HOME": str(scratch),
        "LC_ALL": "C",
    }
    if spec.network_disabled:
        # Best-effort isolation without containers: proxy-aware tools
        # are pointed at a dead end.
        env["http_proxy"] = env["https_proxy"] = "http://127.0.0.1:1"
        env["no_proxy"] = ""
    return env


def _run(argv: tuple[str, ...], scratch: Path, spec: SandboxSpec,
         timeout_s: Optional[float] = None) -> subprocess.CompletedProcess:
    # Scratch-relative commands (e.g. a freshly built ./prog) resolve
    # against the scratch dir, everything else against PATH.
    if "/" in argv[0]:
        if not (scratch / argv[0]).is_file():
            raise SandboxFailure(f"sandbox command not found: {argv[0]}")
    elif shutil.which(argv[0]) is None:
        raise SandboxFailure(f"toolchain command not found: {argv[0]}")
    try:
        return subprocess.run(
            argv, cwd=scratch, env=_scrubbed_env(scratch, spec),
            capture_output=True, text=True,
            timeout=timeout_s or spec.wall_clock_limit_s)
    except subprocess.TimeoutExpired:
        return subprocess.CompletedProcess(argv, returncode=124,
                                           stdout="", stderr="wall-clock limit hit")
    except OSError as exc:
        raise SandboxFailure(f"cannot spawn {argv[0]}: {exc}") from exc


def compiles_correctly(instance: BenchmarkInstance, solution,
                       sandbox: SandboxSpec = SandboxSpec()) -> CompileCheck:
    """Apply solution.fix to the instance code and check it under the
    sandbox.  A fix that fails to apply or to compile is a negative
    verdict, not an error; semantic correctness is only assessed when
    the instance ships unit tests and the build succeeded."""
    command = sandbox.commands.get(instance.language)
    if command is None:
        raise SandboxFailure(f"no sandbox command for {instance.language.value}")

    try:
        patched = apply_diff(instance.erroneous_code, solution.fix)
    except ContextMismatch as exc:
        return CompileCheck(compiled=False, semantically_correct=None,
                            detail=f"fix does not apply: {exc}")

    scratch = Path(tempfile.mkdtemp(prefix="warp-sandbox-",
                                    dir=sandbox.scratch_root))
    try:
        src_name = SOURCE_NAMES[instance.language]
        (scratch / src_name).write_text(patched, encoding="utf-8")
        argv = tuple(part.format(src=src_name, out="prog") for part in command)
        proc = _run(argv, scratch, sandbox)
        if proc.returncode != 0:
            return CompileCheck(compiled=False, semantically_correct=None,
                                detail=proc.stderr.strip()[:400])

        if instance.unit_tests is None:
            return CompileCheck(compiled=True, semantically_correct=None)
        for name, content in instance.unit_tests.files.items():
            target = scratch / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8")
        tests = _run(tuple(instance.unit_tests.command), scratch, sandbox,
                     timeout_s=instance.unit_tests.timeout_s)
        return CompileCheck(compiled=True,
                            semantically_correct=tests.returncode == 0,
                            detail=tests.stderr.strip()[:400])
    finally:
        shutil.rmtree(scratch, ignore_errors=True)
