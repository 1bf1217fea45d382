"""First-pass fix generation: prompt rendering, backends, parsing, scoring."""

from .backends import (
    BackendCapabilities,
    Completion,
    GenerationParams,
    GeneratorBackend,
    HttpBackend,
    ReplayBackend,
    ScriptedBackend,
    prompt_hash,
)
from .engine import (
    Hypothesis,
    HypothesisPrompt,
    ParsedCompletion,
    estimate_tokens,
    extract_stated_confidence,
    generate_hypothesis,
    parse_completion,
    render_hypothesis_prompt,
    score_confidence,
)

__all__ = [
    "BackendCapabilities",
    "Completion",
    "GenerationParams",
    "GeneratorBackend",
    "HttpBackend",
    "ReplayBackend",
    "ScriptedBackend",
    "prompt_hash",
    "Hypothesis",
    "HypothesisPrompt",
    "ParsedCompletion",
    "estimate_tokens",
    "extract_stated_confidence",
    "generate_hypothesis",
    "parse_completion",
    "render_hypothesis_prompt",
    "score_confidence",
]
