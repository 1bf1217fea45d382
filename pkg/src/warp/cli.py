"""Command-line interface: run, watch, eval, and serve.

`run` wraps one build and offers ranked fixes in the terminal; `watch`
re-runs the build on file saves; `eval` scores systems on a benchmark;
`serve` starts the HTTP API and dashboard.  Exit codes: 0 when the
build is clean or a fix was applied, 1 when the build stays broken,
2 for usage and config errors.
"""

from __future__ import annotations

import argparse
import shlex
import sys
import threading
from pathlib import Path
from typing import Optional

from .diffs import format_diff
from .errors import ConfigError, WarpError
from .evalharness import (
    NullAdapter,
    OracleAdapter,
    SystemAdapter,
    load_benchmark,
    render_report_table,
    run_evaluation,
)
from .service.adapter import PipelineAdapter
from .service.api import serve_api
from .service.config import ServiceConfig, build_services, load_config
from .service.pipeline import apply_solution, execute_build
from .service.session import SessionStatus, SessionStore
from .service.watch import watch_loop

__all__ = ["main"]


def _say(message: str) -> None:
    print(f"[warp] {message}")


def _load(config_path: Optional[str]) -> ServiceConfig:
    if config_path is None:
        return ServiceConfig()
    return load_config(config_path)


def _print_solutions(session) -> None:
    for solution in session.solutions:
        solution_id = session.solution_id(solution.rank)
        cited = ", ".join(solution.citations) if solution.citations else "none"
        _say(f"solution {solution.rank} [{solution_id}] "
             f"({solution.provenance.value}, confidence {solution.confidence:.2f}, "
             f"evidence: {cited})")
        for line in solution.explanation.splitlines():
            print(f"    {line}")
        for line in format_diff(solution.fix).splitlines():
            print(f"    {line}")


def _run_round(session, services, store, apply_mode: str) -> int:
    execute_build(session, services, store)
    if session.status is SessionStatus.IDLE:
        _say(session.last_detail)
        return 0 if "succeeded" in session.last_detail else 1
    error = session.error_context
    _say(f"error {error.error_id.id} at {error.file_path}:{error.line}: "
         f"{error.raw_message}")
    _print_solutions(session)
    if apply_mode == "ask" and sys.stdin.isatty():
        answer = input("apply solution 1? [y/N] ").strip().lower()
        apply_mode = "always" if answer in ("y", "yes") else "never"
    if apply_mode == "always":
        top_id = session.solution_id(1)
        apply_solution(store, session, top_id)
        _say(f"applied {top_id} to {session.target_file}")
        return 0
    _say("no fix applied; solutions remain available")
    return 1


def _cmd_run(args: argparse.Namespace) -> int:
    command = args.command
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        raise ConfigError("no build command given (use: warp run -- <command>)")
    config = _load(args.config)
    services, _ = build_services(config)
    store = SessionStore(path=None)
    session = store.create_session(shlex.join(command), args.workdir)
    return _run_round(session, services, store, args.apply)


def _cmd_watch(args: argparse.Namespace) -> int:
    config = _load(args.config)
    services, _ = build_services(config)
    store = SessionStore(path=None)
    session = store.create_session(args.cmd, str(args.dir))
    debounce = args.debounce if args.debounce is not None else config.debounce_ms

    def run_round() -> None:
        if session.status not in (SessionStatus.IDLE, SessionStatus.APPLIED,
                                  SessionStatus.REJECTED):
            return
        _run_round(session, services, store, "never")
        _say(f"watching {args.dir} (debounce {debounce} ms; Ctrl-C to stop)")

    try:
        watch_loop(args.dir, run_round, debounce_ms=debounce)
    except KeyboardInterrupt:
        _say("stopped")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    load = load_benchmark(args.dataset)
    for error in load.errors:
        _say(f"skipping record: {error}")
    if not load.instances:
        raise ConfigError(f"no usable instances in {args.dataset}")
    adapters: list[SystemAdapter] = []
    for name in args.systems.split(","):
        name = name.strip()
        if name == "oracle":
            adapters.append(OracleAdapter())
        elif name == "null":
            adapters.append(NullAdapter())
        elif name == "warp":
            services, _ = build_services(_load(args.config))
            adapters.append(PipelineAdapter(services))
        else:
            raise ConfigError(f"unknown system {name!r} "
                              "(expected oracle, null, or warp)")
    report = run_evaluation(adapters, load.instances,
                            parallelism=args.parallelism)
    report_path = Path(args.report)
    report_path.write_text(report.to_json(), encoding="utf-8")
    print(render_report_table(report))
    _say(f"report written to {report_path}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    handle = serve_api(config)
    _say(f"serving on {handle.base_url} (Ctrl-C to stop)")
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        _say("shutting down")
        handle.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warp",
        description="Real-time compilation-error repair with cited fixes.",
    )
    commands = parser.add_subparsers(dest="subcommand", required=True)

    run = commands.add_parser("run", help="wrap one build and offer fixes")
    run.add_argument("--config", help="YAML config file")
    run.add_argument("--workdir", default=".", help="build working directory")
    run.add_argument("--apply", choices=("ask", "always", "never"),
                     default="ask", help="what to do with the top solution")
    run.add_argument("command", nargs=argparse.REMAINDER,
                     help="build command (after --)")
    run.set_defaults(func=_cmd_run)

    watch = commands.add_parser("watch", help="re-run the build on file saves")
    watch.add_argument("--cmd", required=True, help="build command to wrap")
    watch.add_argument("--config", help="YAML config file")
    watch.add_argument("--debounce", type=int, default=None,
                       help="debounce interval in ms")
    watch.add_argument("dir", type=Path, help="directory to watch")
    watch.set_defaults(func=_cmd_watch)

    evaluate = commands.add_parser("eval", help="score systems on a benchmark")
    evaluate.add_argument("--dataset", required=True, help="benchmark JSONL file")
    evaluate.add_argument("--systems", required=True,
                          help="comma-separated: oracle,null,warp")
    evaluate.add_argument("--report", required=True, help="output report path")
    evaluate.add_argument("--config", help="YAML config file (for warp)")
    evaluate.add_argument("--parallelism", type=int, default=1,
                          help="instances scored concurrently")
    evaluate.set_defaults(func=_cmd_eval)

    serve = commands.add_parser("serve", help="start the HTTP API and dashboard")
    serve.add_argument("--config", required=True, help="YAML config file")
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _say(f"config error: {exc}")
        return 2
    except WarpError as exc:
        _say(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
