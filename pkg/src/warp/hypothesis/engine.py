"""Hypothesis prompt rendering, completion parsing, and scoring."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence

from ..context import ErrorContext, ProjectMetadata
from ..diffs import UnifiedDiff, parse_unified_diff
from ..errors import BudgetTooSmall, MalformedCompletion
from .backends import Completion, GenerationParams, GeneratorBackend

_TEMPLATE = (
    "Task: Analyze and resolve a compilation error.\n"
    "Language: ${L_lang}\n"
    "Error Type: ${E_id}\n"
    "Error Message: \"${M_tok}\"\n"
    "File: ${F_path} at Line: ${L_num}\n"
    "AST Context Snippet: ${C_AST}\n"
    "Relevant Project Metadata: ${P_meta}\n"
    "Instruction: Provide a concise textual explanation of the root cause. "
    "Then, provide a suggested code modification in 'diff -u' format. "
    "Estimate confidence."
)

_FORMAT_REMINDER = (
    "\n\nReminder: answer with a short explanation, then the fix inside a "
    "fenced ```diff block, then a final line 'Confidence: <value in [0,1]>'."
)

_DIFF_BLOCK_RE = re.compile(r"```diff\n(.*?)```", re.DOTALL)
_CONFIDENCE_LINE_RE = re.compile(
    r"^Confidence:\s*([0-9]+(?:\.[0-9]+)?)\s*(%)?\s*$", re.MULTILINE)

# Logistic calibration over mean token log-probability; stand-in
# constants, overridable via config.
CONFIDENCE_MU = -1.0
CONFIDENCE_S = 0.5


@dataclass(frozen=True)
class HypothesisPrompt:
    rendered: str
    field_map: dict[str, str]
    token_estimate: int

    def __post_init__(self):
        if self.token_estimate <= 0:
            raise ValueError("token_estimate must be positive")


@dataclass(frozen=True)
class Hypothesis:
    fix: UnifiedDiff
    explanation: str
    confidence: float
    backend_id: str
    raw_completion: str

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence out of range")
        if not self.explanation:
            raise ValueError("explanation must be non-empty")


@dataclass(frozen=True)
class ParsedCompletion:
    explanation: str
    diff_text: str
    stated_confidence: Optional[float]


def estimate_tokens(text: str) -> int:
    """Rough budget arithmetic: four characters per token."""
    return max(1, (len(text) + 3) // 4)


def render_project_metadata(meta: ProjectMetadata) -> str:
    if meta.is_empty:
        return "None"
    parts = []
    if meta.dependencies:
        rendered = ", ".join(
            f"{d.name}{d.version_spec}" if d.version_spec else d.name
            for d in meta.dependencies)
        parts.append(f"dependencies: {rendered}")
    if meta.compiler_flags:
        parts.append("flags: " + " ".join(meta.compiler_flags))
    if meta.build_tool.value != "None":
        parts.append(f"build tool: {meta.build_tool.value}")
    if meta.language_version:
        parts.append(f"language version: {meta.language_version}")
    return "; ".join(parts)


def _substitute(field_map: dict[str, str]) -> str:
    rendered = _TEMPLATE
    for placeholder, value in field_map.items():
        rendered = rendered.replace("${" + placeholder + "}", value)
    return rendered


def render_hypothesis_prompt(ctx: ErrorContext, budget: int = 2048) -> HypothesisPrompt:
    """Fill the prompt template from the context.  When over budget,
    only the AST snippet is trimmed, symmetrically around the error
    line, which always stays in."""
    base_map = {
        "L_lang": ctx.language.display_name,
        "E_id": ctx.error_id.id,
        "M_tok": " ".join(ctx.message_tokens),
        "F_path": ctx.file_path,
        "L_num": str(ctx.line),
        "P_meta": render_project_metadata(ctx.project_meta),
    }
    skeleton = _substitute({**base_map, "C_AST": ""})
    if estimate_tokens(skeleton) > budget:
        raise BudgetTooSmall(
            f"budget {budget} cannot fit the snippet-free prompt "
            f"({estimate_tokens(skeleton)} tokens)")

    snippet_lines = ctx.ast_window.snippet.split("\n")
    error_index = ctx.line - ctx.ast_window.line_range[0]
    error_index = max(0, min(error_index, len(snippet_lines) - 1))

    while True:
        field_map = {**base_map, "C_AST": "\n".join(snippet_lines)}
        rendered = _substitute(field_map)
        if estimate_tokens(rendered) <= budget or len(snippet_lines) <= 1:
            return HypothesisPrompt(
                rendered=rendered,
                field_map=field_map,
                token_estimate=estimate_tokens(rendered),
            )
        # drop a line from whichever side is farther from the error
        if error_index >= len(snippet_lines) - 1 - error_index:
            snippet_lines = snippet_lines[1:]
            error_index -= 1
        else:
            snippet_lines = snippet_lines[:-1]


def extract_stated_confidence(text: str) -> Optional[float]:
    """Value of the last `Confidence:` line, if any.  A percent sign or
    a value above 1 reads as a percentage; the result is clamped."""
    matches = list(_CONFIDENCE_LINE_RE.finditer(text))
    if not matches:
        return None
    value = float(matches[-1].group(1))
    if matches[-1].group(2) or value > 1.0:
        value /= 100.0
    return min(1.0, max(0.0, value))


def parse_completion(text: str) -> ParsedCompletion:
    """Split a completion into prose, the first fenced diff block, and
    an optional trailing confidence line."""
    match = _DIFF_BLOCK_RE.search(text)
    if match is None:
        raise MalformedCompletion("no fenced ```diff block in completion")
    return ParsedCompletion(explanation=text[:match.start()].strip(),
                            diff_text=match.group(1),
                            stated_confidence=extract_stated_confidence(text))


def score_confidence(logprobs: Optional[Sequence[float]] = None,
                     stated: Optional[float] = None) -> float:
    """Stated value wins (clamped); else a logistic over the mean token
    log-probability; else the neutral 0.5."""
    if stated is not None:
        return min(1.0, max(0.0, stated))
    if logprobs:
        mean = sum(logprobs) / len(logprobs)
        return 1.0 / (1.0 + math.exp(-(mean - CONFIDENCE_MU) / CONFIDENCE_S))
    return 0.5


def generate_hypothesis(prompt: HypothesisPrompt,
                        backend: GeneratorBackend) -> Hypothesis:
    """One backend call, one structured-format retry, then parse and
    score.  Raises MalformedCompletion only after the retry also fails."""
    params = GenerationParams()
    completion = backend.complete(prompt.rendered, params)
    try:
        parsed = parse_completion(completion.text)
    except MalformedCompletion:
        completion = backend.complete(prompt.rendered + _FORMAT_REMINDER, params)
        parsed = parse_completion(completion.text)
    return _to_hypothesis(parsed, completion, backend)


def _to_hypothesis(parsed: ParsedCompletion, completion: Completion,
                   backend: GeneratorBackend) -> Hypothesis:
    explanation = parsed.explanation or "No explanation provided."
    return Hypothesis(
        fix=parse_unified_diff(parsed.diff_text),
        explanation=explanation,
        confidence=score_confidence(completion.token_logprobs,
                                    parsed.stated_confidence),
        backend_id=backend.identity,
        raw_completion=completion.text,
    )
