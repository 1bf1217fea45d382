"""Synthesis prompt rendering, completion parsing, recalibration, and
ranking tests."""

import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tests.test_hypothesis import semicolon_context
from warp.diffs import format_diff, parse_unified_diff
from warp.errors import BackendUnavailable, BudgetTooSmall, MalformedCompletion
from warp.hypothesis import Completion, Hypothesis, ScriptedBackend, estimate_tokens
from warp.retrieval import EvidenceSet, EvidenceSnippet, ScoreComponents, SourceKind
from warp.synthesis import (
    FinalSolution,
    Provenance,
    hypothesis_only,
    parse_synthesis_completion,
    rank_solutions,
    recalibrate_confidence,
    render_synthesis_prompt,
    synthesize,
)

SEMI_DIFF = (
    "--- a/main.c\n"
    "+++ b/main.c\n"
    "@@ -4 +4 @@\n"
    "-    int total = 41 + 1\n"
    "+    int total = 41 + 1;\n"
)

BIG_DIFF = (
    "--- a/main.c\n"
    "+++ b/main.c\n"
    "@@ -4,4 +4,4 @@\n"
    "-    int total = 41 + 1\n"
    "-    int extra = 0\n"
    "+    int total = 41 + 1;\n"
    "+    int extra = 0;\n"
    " \n"
    "     return total;\n"
)


def make_hypo(confidence=0.9):
    return Hypothesis(
        fix=parse_unified_diff(SEMI_DIFF),
        explanation="The declaration on line 4 is missing its semicolon.",
        confidence=confidence,
        backend_id="scripted",
        raw_completion="",
    )


def make_snippet(sid, score, text=None):
    return EvidenceSnippet(
        id=sid,
        text=text if text is not None else f"Evidence body for {sid}.",
        url=f"https://example.com/{sid}",
        source=SourceKind.WEB_SEARCH,
        published_at=None,
        components=ScoreComponents(score, score, score, score),
        score=score,
    )


def make_evidence(*scored):
    """Build an EvidenceSet from (id, score) pairs, descending score."""
    return EvidenceSet(tuple(make_snippet(sid, score) for sid, score in scored))


THREE_EVIDENCE = make_evidence(("ev-1", 0.9), ("ev-2", 0.75), ("ev-3", 0.5))

GOOD_COMPLETION = (
    "```diff\n" + SEMI_DIFF + "```\n"
    "A semicolon must terminate the declaration before `return` [ev:ev-2].\n"
    "Evidence-Used: ev-2\n"
    "Confidence: 0.9\n"
)


def completion(text):
    return Completion(text=text)


def render(evidence, budget=100_000, hypo=None):
    return render_synthesis_prompt(
        semicolon_context(), hypo or make_hypo(), evidence, budget=budget)


INSTRUCTION_LINES = [
    "Synthesize to:",
    "1. Confirm/refine explanation, citing evidence.",
    "2. Confirm/refine code fix (diff).",
    "3. Reconcile/highlight conflicting web evidence.",
    "4. Provide overall confidence for the final solution.",
    "Output: (1) refined diff, (2) synthesized explanation with citations,",
]


class TestRenderPrompt:
    def test_all_snippets_under_ample_budget(self):
        evidence = make_evidence(*((f"ev-{i}", 0.9 - i * 0.1) for i in range(8)))
        prompt = render(evidence)
        assert prompt.included_evidence_ids == evidence.ids
        for snippet in evidence.snippets:
            assert f"[ev:{snippet.id}]" in prompt.rendered
            assert snippet.text in prompt.rendered

    def test_embeds_hypothesis_fix_and_explanation(self):
        hypo = make_hypo()
        prompt = render(THREE_EVIDENCE, hypo=hypo)
        assert format_diff(hypo.fix) in prompt.rendered
        assert hypo.explanation in prompt.rendered

    def test_instruction_lines_present_once(self):
        prompt = render(THREE_EVIDENCE)
        for line in INSTRUCTION_LINES:
            assert prompt.rendered.count(line) == 1, line

    def test_no_placeholder_survives(self):
        prompt = render(THREE_EVIDENCE)
        assert "${" not in prompt.rendered

    def test_tight_budget_keeps_top_three(self):
        snippets = [make_snippet(f"ev-{i}", 0.9 - i * 0.1, text=f"body {i} " * 40)
                    for i in range(8)]
        full = EvidenceSet(tuple(snippets))
        top3 = EvidenceSet(tuple(snippets[:3]))
        budget = render(top3).token_estimate
        prompt = render(full, budget=budget)
        assert prompt.included_evidence_ids == top3.ids

    def test_empty_evidence_renders_sentinel(self):
        prompt = render(EvidenceSet(()))
        assert "No web evidence available." in prompt.rendered
        assert prompt.included_evidence_ids == ()

    def test_budget_too_small(self):
        with pytest.raises(BudgetTooSmall):
            render(THREE_EVIDENCE, budget=10)

    def test_token_estimate_matches_rendered(self):
        prompt = render(THREE_EVIDENCE)
        assert prompt.token_estimate == estimate_tokens(prompt.rendered)

    def test_deterministic(self):
        assert render(THREE_EVIDENCE).rendered == render(THREE_EVIDENCE).rendered


class TestParseCompletion:
    def test_four_parts(self):
        parsed = parse_synthesis_completion(GOOD_COMPLETION)
        assert parsed.fix == parse_unified_diff(SEMI_DIFF)
        assert parsed.used_ids == ("ev-2",)
        assert parsed.stated_confidence == 0.9
        assert parsed.explanation == (
            "A semicolon must terminate the declaration before `return` [ev:ev-2].")

    def test_missing_diff_block_raises(self):
        with pytest.raises(MalformedCompletion):
            parse_synthesis_completion("Looks fine to me.\nConfidence: 0.5\n")

    def test_unparseable_diff_raises(self):
        text = "```diff\nnot a diff\n```\nConfidence: 0.5\n"
        with pytest.raises(MalformedCompletion):
            parse_synthesis_completion(text)

    def test_missing_confidence_raises(self):
        text = "```diff\n" + SEMI_DIFF + "```\nEvidence-Used: none\n"
        with pytest.raises(MalformedCompletion):
            parse_synthesis_completion(text)

    def test_evidence_used_none(self):
        text = "```diff\n" + SEMI_DIFF + "```\nEvidence-Used: none\nConfidence: 0.5\n"
        assert parse_synthesis_completion(text).used_ids == ()

    def test_evidence_used_line_optional(self):
        text = "```diff\n" + SEMI_DIFF + "```\nAll good.\nConfidence: 0.5\n"
        assert parse_synthesis_completion(text).used_ids == ()

    def test_evidence_used_separators_and_duplicates(self):
        text = ("```diff\n" + SEMI_DIFF + "```\n"
                "Evidence-Used: ev-1, ev-2 ev-1,ev-3\nConfidence: 0.5\n")
        assert parse_synthesis_completion(text).used_ids == ("ev-1", "ev-2", "ev-3")

    def test_percent_confidence(self):
        text = "```diff\n" + SEMI_DIFF + "```\nConfidence: 85%\n"
        assert parse_synthesis_completion(text).stated_confidence == 0.85

    def test_explanation_excludes_bookkeeping_lines(self):
        parsed = parse_synthesis_completion(GOOD_COMPLETION)
        assert "Evidence-Used" not in parsed.explanation
        assert "Confidence:" not in parsed.explanation
        assert "```" not in parsed.explanation


class TestSynthesize:
    def run(self, completions, evidence=THREE_EVIDENCE, hypo=None):
        hypo = hypo or make_hypo()
        prompt = render(evidence, hypo=hypo)
        backend = ScriptedBackend([completion(c) for c in completions])
        return synthesize(prompt, hypo, backend, evidence), backend

    def test_canned_four_part_completion(self):
        solution, backend = self.run([GOOD_COMPLETION])
        assert solution.provenance is Provenance.SYNTHESIZED
        assert solution.citations == ("ev-2",)
        assert "[ev:ev-2]" in solution.explanation
        assert solution.fix == make_hypo().fix
        assert solution.confidence == pytest.approx(0.6 * 0.9 + 0.4 * 0.75, abs=1e-12)
        assert len(backend.prompts_seen) == 1

    def test_no_citations_keeps_stated_share_only(self):
        text = ("```diff\n" + SEMI_DIFF + "```\n"
                "The fix stands on its own.\nEvidence-Used: none\nConfidence: 0.9\n")
        solution, _ = self.run([text])
        assert solution.citations == ()
        assert solution.confidence == pytest.approx(0.54, abs=1e-12)

    def test_unknown_citation_dropped_with_warning(self, caplog):
        text = ("```diff\n" + SEMI_DIFF + "```\n"
                "Confirmed by upstream discussion [ev:ev-9].\n"
                "Evidence-Used: ev-9\nConfidence: 0.9\n")
        with caplog.at_level(logging.WARNING, logger="warp.synthesis"):
            solution, _ = self.run([text])
        assert solution.citations == ()
        assert "[ev:" not in solution.explanation
        assert any("ev-9" in r.message for r in caplog.records)
        assert solution.confidence == pytest.approx(0.54, abs=1e-12)

    def test_garbage_twice_falls_back_to_hypothesis(self):
        solution, backend = self.run(["nonsense", "still nonsense"])
        assert solution.provenance is Provenance.HYPOTHESIS_ONLY
        assert solution.fix == make_hypo().fix
        assert solution.citations == ()
        assert solution.confidence == pytest.approx(0.8 * 0.9, abs=1e-12)
        assert len(backend.prompts_seen) == 2
        assert "Reminder:" in backend.prompts_seen[1]

    def test_garbage_then_good_recovers(self):
        solution, backend = self.run(["nonsense", GOOD_COMPLETION])
        assert solution.provenance is Provenance.SYNTHESIZED
        assert len(backend.prompts_seen) == 2

    def test_backend_unavailable_propagates(self):
        with pytest.raises(BackendUnavailable):
            self.run([])

    def test_citation_order_follows_evidence_used_line(self):
        text = ("```diff\n" + SEMI_DIFF + "```\n"
                "Both report the same cause [ev:ev-1].\n"
                "Evidence-Used: ev-3, ev-1\nConfidence: 0.8\n")
        solution, _ = self.run([text])
        assert solution.citations == ("ev-3", "ev-1")

    def test_marker_only_citations(self):
        text = ("```diff\n" + SEMI_DIFF + "```\n"
                "Same failure mode reported upstream [ev:ev-1].\nConfidence: 0.8\n")
        solution, _ = self.run([text])
        assert solution.citations == ("ev-1",)

    def test_fallback_confidence_clamped(self):
        solution, _ = self.run(["garbage", "garbage"], hypo=make_hypo(confidence=1.0))
        assert solution.confidence == pytest.approx(0.8, abs=1e-12)

    def test_hypothesis_only_helper(self):
        solution = hypothesis_only(make_hypo(confidence=0.5))
        assert solution.provenance is Provenance.HYPOTHESIS_ONLY
        assert solution.confidence == pytest.approx(0.4, abs=1e-12)
        assert solution.rank == 1


class TestRecalibrate:
    def draft(self, citations):
        return FinalSolution(
            fix=parse_unified_diff(SEMI_DIFF),
            explanation="A semicolon is required.",
            citations=citations,
            confidence=0.5,
        )

    def test_upper_fixed_point(self):
        evidence = make_evidence(("ev-1", 1.0), ("ev-2", 1.0))
        value = recalibrate_confidence(1.0, self.draft(("ev-1", "ev-2")), evidence)
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_worked_example(self):
        evidence = make_evidence(("ev-1", 0.8), ("ev-2", 0.6))
        value = recalibrate_confidence(0.9, self.draft(("ev-1", "ev-2")), evidence)
        assert value == pytest.approx(0.82, abs=1e-12)

    def test_no_citations(self):
        value = recalibrate_confidence(0.7, self.draft(()), THREE_EVIDENCE)
        assert value == pytest.approx(0.42, abs=1e-12)

    @given(stated=st.floats(min_value=0.0, max_value=1.0),
           scores=st.lists(st.floats(min_value=0.0, max_value=1.0),
                           min_size=0, max_size=5))
    def test_bounds(self, stated, scores):
        ordered = sorted(scores, reverse=True)
        evidence = make_evidence(*((f"ev-{i}", s) for i, s in enumerate(ordered)))
        value = recalibrate_confidence(stated, self.draft(evidence.ids), evidence)
        assert 0.0 <= value <= 1.0

    @given(low=st.floats(min_value=0.0, max_value=1.0),
           high=st.floats(min_value=0.0, max_value=1.0))
    def test_monotone_in_stated(self, low, high):
        low, high = min(low, high), max(low, high)
        draft = self.draft(("ev-1",))
        evidence = make_evidence(("ev-1", 0.5))
        assert (recalibrate_confidence(low, draft, evidence)
                <= recalibrate_confidence(high, draft, evidence))

    @given(low=st.floats(min_value=0.0, max_value=1.0),
           high=st.floats(min_value=0.0, max_value=1.0))
    def test_monotone_in_agreement(self, low, high):
        low, high = min(low, high), max(low, high)
        draft = self.draft(("ev-1",))
        assert (recalibrate_confidence(0.5, draft, make_evidence(("ev-1", low)))
                <= recalibrate_confidence(0.5, draft, make_evidence(("ev-1", high))))


class TestFinalSolutionInvariants:
    def test_dangling_marker_rejected(self):
        with pytest.raises(ValueError):
            FinalSolution(
                fix=parse_unified_diff(SEMI_DIFF),
                explanation="See [ev:ev-1].",
                citations=(),
                confidence=0.5,
            )

    def test_confidence_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            FinalSolution(fix=parse_unified_diff(SEMI_DIFF), explanation="x",
                          citations=(), confidence=1.5)

    def test_rank_must_be_positive(self):
        with pytest.raises(ValueError):
            FinalSolution(fix=parse_unified_diff(SEMI_DIFF), explanation="x",
                          citations=(), confidence=0.5, rank=0)


def solution(conf, provenance=Provenance.SYNTHESIZED, diff_text=SEMI_DIFF):
    return FinalSolution(
        fix=parse_unified_diff(diff_text),
        explanation="A semicolon is required.",
        citations=(),
        confidence=conf,
        provenance=provenance,
    )


def precedes(a, b):
    """Independent ordering oracle for rank_solutions."""
    if a.confidence != b.confidence:
        return a.confidence > b.confidence
    pa = 0 if a.provenance is Provenance.SYNTHESIZED else 1
    pb = 0 if b.provenance is Provenance.SYNTHESIZED else 1
    if pa != pb:
        return pa < pb
    return a.fix.changed_line_count() < b.fix.changed_line_count()


class TestRankSolutions:
    def test_single_solution(self):
        ranked = rank_solutions([solution(0.5)])
        assert [s.rank for s in ranked] == [1]

    def test_synthesized_wins_confidence_tie(self):
        ranked = rank_solutions([
            solution(0.7, Provenance.HYPOTHESIS_ONLY),
            solution(0.7, Provenance.SYNTHESIZED),
        ])
        assert ranked[0].provenance is Provenance.SYNTHESIZED
        assert [s.rank for s in ranked] == [1, 2]

    def test_smaller_diff_wins_full_tie(self):
        ranked = rank_solutions([solution(0.7, diff_text=BIG_DIFF),
                                 solution(0.7, diff_text=SEMI_DIFF)])
        assert ranked[0].fix.changed_line_count() == 2
        assert ranked[1].fix.changed_line_count() == 4

    def test_distinct_confidences_descend(self):
        confs = [0.2, 0.9, 0.5, 0.7, 0.1]
        ranked = rank_solutions([solution(c) for c in confs])
        assert [s.confidence for s in ranked] == sorted(confs, reverse=True)
        assert [s.rank for s in ranked] == [1, 2, 3, 4, 5]

    @given(st.lists(
        st.tuples(
            st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]),
            st.sampled_from([Provenance.SYNTHESIZED, Provenance.HYPOTHESIS_ONLY]),
            st.sampled_from([SEMI_DIFF, BIG_DIFF]),
        ),
        min_size=1, max_size=8))
    def test_rank_is_permutation_and_ordered(self, specs):
        solutions = [solution(c, p, d) for c, p, d in specs]
        ranked = rank_solutions(solutions)
        assert sorted(s.rank for s in ranked) == list(range(1, len(specs) + 1))
        for earlier, later in zip(ranked, ranked[1:]):
            assert not precedes(later, earlier)
        stripped = lambda group: sorted(
            (s.confidence, s.provenance, format_diff(s.fix)) for s in group)
        assert stripped(solutions) == stripped(ranked)
