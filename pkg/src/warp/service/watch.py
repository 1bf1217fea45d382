"""Polling file watcher that fires a callback after saves settle.

A change starts (or extends) a quiet window; the callback runs once the
tree has been stable for the debounce interval, so a burst of saves
coalesces into one rebuild.  After the callback returns, the baseline
is retaken, which also ignores files the build itself wrote.
"""

from __future__ import annotations

import os
import threading
import time
from pathlib import Path
from typing import Callable, Optional

__all__ = ["DEFAULT_DEBOUNCE_MS", "snapshot_tree", "watch_loop"]

DEFAULT_DEBOUNCE_MS = 300
DEFAULT_POLL_INTERVAL_MS = 50

IGNORED_DIRS = frozenset({".git", "__pycache__", "node_modules", ".venv"})


def snapshot_tree(root: Path) -> dict[str, int]:
    """Map of relative file path to mtime (ns), skipping ignored dirs."""
    state: dict[str, int] = {}
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = [d for d in dirnames if d not in IGNORED_DIRS]
        for name in filenames:
            path = Path(dirpath) / name
            try:
                state[str(path.relative_to(root))] = path.stat().st_mtime_ns
            except OSError:
                continue  # deleted between listing and stat
    return state


def watch_loop(
    root: Path | str,
    on_change: Callable[[], None],
    *,
    debounce_ms: int = DEFAULT_DEBOUNCE_MS,
    poll_interval_ms: int = DEFAULT_POLL_INTERVAL_MS,
    stop: Optional[threading.Event] = None,
    initial_run: bool = True,
) -> int:
    """Poll `root` until `stop` is set; returns the number of callback runs.

    `on_change` runs synchronously; changes made while it runs are
    folded into the fresh baseline rather than retriggering.
    """
    root = Path(root)
    stop = stop or threading.Event()
    runs = 0
    if initial_run:
        on_change()
        runs += 1
    baseline = snapshot_tree(root)
    pending_since: Optional[float] = None
    while not stop.wait(poll_interval_ms / 1000.0):
        current = snapshot_tree(root)
        if current != baseline:
            baseline = current
            pending_since = time.monotonic()
            continue
        if (pending_since is not None
                and (time.monotonic() - pending_since) * 1000.0 >= debounce_ms):
            pending_since = None
            on_change()
            runs += 1
            baseline = snapshot_tree(root)
    return runs
