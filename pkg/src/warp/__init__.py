"""warp: real-time compilation-error repair engine.

Monitors build commands, parses diagnostics into a structured error
context, combines a pluggable text-generation backend with ranked web
evidence, and presents cited, confidence-scored unified-diff fixes.
Ships an evaluation harness and a local review dashboard.
"""

__version__ = "0.1.0"
