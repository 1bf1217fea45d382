"""Final-solution synthesis: merge the first-pass fix with ranked web
evidence into a cited, confidence-recalibrated solution.

The synthesis prompt embeds the hypothesis diff, its explanation, and
every evidence snippet that fits the token budget, labeled by id.  The
completion is parsed into four parts (refined diff, explanation with
inline `[ev:<id>]` citations, an `Evidence-Used:` id list, a final
`Confidence:` line); stated confidence is then blended with the mean
score of the cited snippets.  A malformed completion gets one retry,
after which the hypothesis is passed through unchanged with reduced
confidence.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

from .context import ErrorContext
from .diffs import UnifiedDiff, format_diff, parse_unified_diff
from .errors import BudgetTooSmall, DiffError, MalformedCompletion
from .hypothesis import (
    GenerationParams,
    GeneratorBackend,
    Hypothesis,
    estimate_tokens,
    extract_stated_confidence,
)
from .hypothesis.engine import render_project_metadata
from .retrieval import EvidenceSet, EvidenceSnippet

log = logging.getLogger("warp.synthesis")

_TEMPLATE = (
    "Given original error context: ${E_ctx}, initial hypothesis: "
    "Fix='${Fix_hypo}', Explanation='${Expl_hypo}'.\n"
    "Review web evidence: ${Ev_set}.\n"
    "Synthesize to:\n"
    "1. Confirm/refine explanation, citing evidence.\n"
    "2. Confirm/refine code fix (diff). Prioritize better web-suggested "
    "approaches, explaining rationale.\n"
    "3. Reconcile/highlight conflicting web evidence.\n"
    "4. Provide overall confidence for the final solution.\n"
    "Output: (1) refined diff, (2) synthesized explanation with citations, "
    "(3) utilized evidence IDs, (4) final confidence."
)

_FORMAT_NOTE = (
    "\n\nRespond with the refined fix in a fenced ```diff block, then the "
    "explanation citing snippets inline as [ev:<id>], then a line "
    "'Evidence-Used: <comma-separated ids, or none>', then a final line "
    "'Confidence: <value in [0,1]>'."
)

_RETRY_REMINDER = (
    "\n\nReminder: the fix must be inside a fenced ```diff block, the "
    "evidence ids you used must appear on an 'Evidence-Used:' line, and "
    "the last line must be 'Confidence: <value in [0,1]>'."
)

_EMPTY_EVIDENCE_TEXT = "No web evidence available"

_DIFF_BLOCK_RE = re.compile(r"```diff\n(.*?)```", re.DOTALL)
_EVIDENCE_USED_RE = re.compile(r"^Evidence-Used:[ \t]*(.*)$", re.MULTILINE)
_CONFIDENCE_LINE_RE = re.compile(r"^Confidence:.*$", re.MULTILINE)
_CITATION_MARKER_RE = re.compile(r"\[ev:([A-Za-z0-9_-]+)\]")

# Blend weights for recalibration; overridable via config.
STATED_WEIGHT = 0.6
AGREEMENT_WEIGHT = 0.4

# Confidence haircut applied when synthesis fails and the hypothesis
# is passed through unreviewed.
FALLBACK_CONFIDENCE_FACTOR = 0.8


class Provenance(str, Enum):
    SYNTHESIZED = "Synthesized"
    HYPOTHESIS_ONLY = "HypothesisOnly"


@dataclass(frozen=True)
class SynthesisPrompt:
    rendered: str
    included_evidence_ids: tuple[str, ...]
    token_estimate: int

    def __post_init__(self):
        if self.token_estimate <= 0:
            raise ValueError("token_estimate must be positive")
        for snippet_id in self.included_evidence_ids:
            if f"[ev:{snippet_id}]" not in self.rendered:
                raise ValueError(f"included id {snippet_id} not labeled in prompt")


@dataclass(frozen=True)
class FinalSolution:
    fix: UnifiedDiff
    explanation: str
    citations: tuple[str, ...]
    confidence: float
    rank: int = 1
    provenance: Provenance = Provenance.SYNTHESIZED

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence out of range")
        if self.rank < 1:
            raise ValueError("rank must be positive")
        dangling = set(_CITATION_MARKER_RE.findall(self.explanation)) - set(self.citations)
        if dangling:
            raise ValueError(f"dangling citation markers: {sorted(dangling)}")


@dataclass(frozen=True)
class ParsedSynthesis:
    fix: UnifiedDiff
    explanation: str
    used_ids: tuple[str, ...]
    stated_confidence: float


def _render_error_context(ctx: ErrorContext) -> str:
    return (f'{ctx.language.display_name} {ctx.error_id.id} at '
            f'{ctx.file_path}:{ctx.line}: "{ctx.raw_message}"\n'
            f'{ctx.ast_window.snippet}\n'
            f'Project metadata: {render_project_metadata(ctx.project_meta)}')


def _render_evidence_entry(snippet: EvidenceSnippet) -> str:
    return (f"[ev:{snippet.id}] ({snippet.source.value}, "
            f"score {snippet.score:.3f}) {snippet.url}\n{snippet.text}")


def _substitute(template: str, field_map: dict[str, str]) -> str:
    rendered = template
    for placeholder, value in field_map.items():
        rendered = rendered.replace("${" + placeholder + "}", value)
    return rendered


def render_synthesis_prompt(ctx: ErrorContext, hypo: Hypothesis,
                            evidence: EvidenceSet,
                            budget: int = 4096) -> SynthesisPrompt:
    """Fill the synthesis template, admitting evidence snippets in score
    order until the budget is exhausted.  Snippets are all-or-nothing;
    the cut is a prefix of the ranked set."""
    base_map = {
        "E_ctx": _render_error_context(ctx),
        "Fix_hypo": format_diff(hypo.fix),
        "Expl_hypo": hypo.explanation,
    }

    def rendered_with(snippets: Sequence[EvidenceSnippet]) -> str:
        if snippets:
            ev_text = "\n\n".join(_render_evidence_entry(s) for s in snippets)
        else:
            ev_text = _EMPTY_EVIDENCE_TEXT
        return _substitute(_TEMPLATE, {**base_map, "Ev_set": ev_text}) + _FORMAT_NOTE

    skeleton = rendered_with(())
    if estimate_tokens(skeleton) > budget:
        raise BudgetTooSmall(
            f"budget {budget} cannot fit the evidence-free prompt "
            f"({estimate_tokens(skeleton)} tokens)")

    included: list[EvidenceSnippet] = []
    for snippet in evidence.snippets:
        if estimate_tokens(rendered_with(included + [snippet])) > budget:
            break
        included.append(snippet)

    rendered = rendered_with(included)
    return SynthesisPrompt(
        rendered=rendered,
        included_evidence_ids=tuple(s.id for s in included),
        token_estimate=estimate_tokens(rendered),
    )


def parse_synthesis_completion(text: str) -> ParsedSynthesis:
    """Split a completion into the four required parts.  The diff block
    must parse and the confidence line must be present; the
    Evidence-Used line is optional (absent means no citations)."""
    match = _DIFF_BLOCK_RE.search(text)
    if match is None:
        raise MalformedCompletion("no fenced ```diff block in completion")
    try:
        fix = parse_unified_diff(match.group(1))
    except DiffError as exc:
        raise MalformedCompletion(f"unparseable diff block: {exc}") from exc

    remainder = text[:match.start()] + text[match.end():]
    used: tuple[str, ...] = ()
    used_match = _EVIDENCE_USED_RE.search(remainder)
    if used_match:
        raw_ids = used_match.group(1).strip()
        if raw_ids and raw_ids.lower() != "none":
            used = tuple(dict.fromkeys(
                t for t in re.split(r"[,\s]+", raw_ids) if t))
        remainder = remainder[:used_match.start()] + remainder[used_match.end():]

    stated = extract_stated_confidence(remainder)
    if stated is None:
        raise MalformedCompletion("no Confidence line in completion")
    explanation = _CONFIDENCE_LINE_RE.sub("", remainder).strip()
    return ParsedSynthesis(fix=fix, explanation=explanation,
                           used_ids=used, stated_confidence=stated)


def _strip_markers(text: str, ids: set[str]) -> str:
    pattern = re.compile(
        r"[ \t]*\[ev:(" + "|".join(re.escape(i) for i in sorted(ids)) + r")\]")
    return pattern.sub("", text).strip()


def hypothesis_only(hypo: Hypothesis) -> FinalSolution:
    """Pass the hypothesis through unreviewed with reduced confidence."""
    return FinalSolution(
        fix=hypo.fix,
        explanation=hypo.explanation,
        citations=(),
        confidence=min(1.0, max(0.0, hypo.confidence * FALLBACK_CONFIDENCE_FACTOR)),
        provenance=Provenance.HYPOTHESIS_ONLY,
    )


def recalibrate_confidence(stated: float, solution: FinalSolution,
                           evidence: EvidenceSet,
                           stated_weight: float = STATED_WEIGHT,
                           agreement_weight: float = AGREEMENT_WEIGHT) -> float:
    """Blend stated confidence with agreement, the mean score of the
    cited snippets (0 when nothing is cited)."""
    scores = [found.score for found in
              (evidence.by_id(c) for c in solution.citations)
              if found is not None]
    agreement = sum(scores) / len(scores) if scores else 0.0
    stated = min(1.0, max(0.0, stated))
    return min(1.0, max(0.0, stated_weight * stated + agreement_weight * agreement))


def synthesize(prompt: SynthesisPrompt, hypo: Hypothesis,
               backend: GeneratorBackend, evidence: EvidenceSet,
               params: Optional[GenerationParams] = None) -> FinalSolution:
    """Run the synthesis backend over the rendered prompt and build the
    final solution.  One retry on a malformed completion; a second
    failure falls back to the unreviewed hypothesis.  Backend
    unavailability propagates."""
    params = params or GenerationParams()
    parsed: Optional[ParsedSynthesis] = None
    for attempt in (prompt.rendered, prompt.rendered + _RETRY_REMINDER):
        completion = backend.complete(attempt, params)
        try:
            parsed = parse_synthesis_completion(completion.text)
            break
        except MalformedCompletion as exc:
            log.warning("synthesis completion malformed: %s", exc)
    if parsed is None:
        log.warning("synthesis failed twice; passing hypothesis through")
        return hypothesis_only(hypo)

    markers = _CITATION_MARKER_RE.findall(parsed.explanation)
    offered = set(prompt.included_evidence_ids)
    citations: list[str] = []
    dropped: set[str] = set()
    for cited in dict.fromkeys((*parsed.used_ids, *markers)):
        if cited in offered:
            citations.append(cited)
        else:
            dropped.add(cited)
    explanation = parsed.explanation
    if dropped:
        log.warning("dropping citations not offered in the prompt: %s",
                    ", ".join(sorted(dropped)))
        explanation = _strip_markers(explanation, dropped)
    if not explanation:
        explanation = hypo.explanation

    draft = FinalSolution(
        fix=parsed.fix,
        explanation=explanation,
        citations=tuple(citations),
        confidence=parsed.stated_confidence,
        provenance=Provenance.SYNTHESIZED,
    )
    return replace(draft, confidence=recalibrate_confidence(
        parsed.stated_confidence, draft, evidence))


def rank_solutions(solutions: Sequence[FinalSolution]) -> list[FinalSolution]:
    """Order by descending confidence; ties prefer Synthesized over
    HypothesisOnly, then smaller fixes.  Ranks are assigned 1..n."""
    ordered = sorted(solutions, key=lambda s: (
        -s.confidence,
        0 if s.provenance is Provenance.SYNTHESIZED else 1,
        s.fix.changed_line_count(),
    ))
    return [replace(s, rank=position)
            for position, s in enumerate(ordered, start=1)]
