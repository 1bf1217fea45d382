"""Tests for query formulation, source clients, chunking, scoring,
and evidence selection."""

from __future__ import annotations

import itertools
import json
import logging
import time
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warp.context import (AstWindow, BuildTool, Dependency, ErrorContext,
                          ProjectMetadata)
from warp.diagnostics import CanonicalErrorId, LanguageId, tokenize_message
from warp.diffs import parse_unified_diff
from warp.errors import SourceError
from warp.evalharness.metrics import ndcg_at_3
from warp.hypothesis import Hypothesis
from warp.retrieval import (EvidenceSnippet, FixtureSourceClient,
                            GitHubIssuesClient, QueryOrigin, RetrievalConfig,
                            ScoreComponents, ScoreWeights, SearchQuery,
                            SearchResultDoc, SourceKind, StackOverflowClient,
                            WebSearchClient, chunk_document, evidence_id,
                            formulate_queries, gather_evidence, jaccard,
                            recency_score, reputation_score, request_key,
                            score_evidence, search_source, select_evidence_set,
                            selection_order_key, word_ngrams)

FIXTURES = Path(__file__).parent / "fixtures"

# Fixed scoring clock: 2026-01-01T00:00:00Z.
REFERENCE_TIME = 1_767_225_600_000
MS_PER_DAY = 86_400_000
CONFIG = RetrievalConfig(reference_time=REFERENCE_TIME)

GO_SNIPPET = 'func main() {\n\tfmt.Printl("hello world")\n}'


def make_ctx(language=LanguageId.GO, message="undefined: fmt.Printl",
             error_id="GO_UNDEFINED_IDENTIFIER", ast_snippet=GO_SNIPPET,
             deps=()):
    lines = ast_snippet.count("\n") + 1
    window = AstWindow(snippet=ast_snippet, line_range=(1, lines),
                       enclosing_symbol=None, node_kinds=(), degraded=True)
    meta = ProjectMetadata(dependencies=tuple(deps))
    return ErrorContext(
        error_id=CanonicalErrorId(error_id),
        message_tokens=tuple(tokenize_message(message)),
        raw_message=message,
        file_path="main.go",
        line=1,
        language=language,
        ast_window=window,
        project_meta=meta,
        capture_ref="cap-test",
    )


def make_hypo(explanation: str) -> Hypothesis:
    fix = parse_unified_diff(
        "--- a/main.go\n+++ b/main.go\n@@ -1 +1 @@\n-x\n+y\n")
    return Hypothesis(fix=fix, explanation=explanation, confidence=0.5,
                      backend_id="scripted", raw_completion="")


def make_doc(url="https://example.com/a", body="some body text",
             source=SourceKind.WEB_SEARCH, published_at=None, signals=None,
             title="t"):
    return SearchResultDoc(url=url, title=title, body=body, source=source,
                           published_at=published_at,
                           source_signals=signals or {})


class TestFormulateQueries:
    def test_go_fixture_three_queries(self):
        ctx = make_ctx(deps=[Dependency("github.com/gin-gonic/gin", "v1.9.1")])
        queries = formulate_queries(ctx, None)
        assert len(queries) == 3
        assert queries[0].text == "go undefined: fmt.Printl"
        assert queries[0].target is SourceKind.STACK_OVERFLOW
        assert queries[0].origin == frozenset({QueryOrigin.MESSAGE})
        assert queries[1].text == "go undefined identifier"
        assert queries[1].target is SourceKind.WEB_SEARCH
        assert queries[2].target is SourceKind.GITHUB_ISSUES
        assert queries[2].text.endswith("gin 1.9.1")

    def test_dependency_version_in_query(self):
        ctx = make_ctx(language=LanguageId.PYTHON,
                       message="ModuleNotFoundError: No module named 'requests'",
                       error_id="PY_MODULE_NOT_FOUND",
                       ast_snippet="import requests",
                       deps=[Dependency("requests", "==2.31.0")])
        queries = formulate_queries(ctx, None)
        assert any("requests 2.31.0" in q.text for q in queries)

    def test_no_dependencies_no_library_query(self):
        queries = formulate_queries(make_ctx(), None)
        assert len(queries) == 2
        assert all(q.target is not SourceKind.GITHUB_ISSUES for q in queries)

    def test_verbatim_explanation_deduplicated(self):
        ctx = make_ctx()
        hypo = make_hypo(ctx.raw_message)
        queries = formulate_queries(ctx, hypo)
        assert len(queries) == 2
        assert all(QueryOrigin.HYPOTHESIS_KEYWORDS not in q.origin
                   for q in queries)

    def test_hypothesis_keywords_rarest_first(self):
        ctx = make_ctx(deps=[Dependency("github.com/gin-gonic/gin", "v1.9.1")])
        hypo = make_hypo(
            "The goroutine channel deadlock comes from unbuffered sends.")
        queries = formulate_queries(ctx, hypo)
        assert len(queries) == 4
        last = queries[-1]
        assert last.origin == frozenset({QueryOrigin.HYPOTHESIS_KEYWORDS})
        assert last.target is SourceKind.WEB_SEARCH
        assert last.text == "go goroutine channel deadlock"

    def test_paths_stripped_from_message(self):
        ctx = make_ctx(language=LanguageId.C,
                       message="./include/util.h: No such file or directory",
                       error_id="C_INCLUDE_NOT_FOUND",
                       ast_snippet='#include "util.h"')
        queries = formulate_queries(ctx, None)
        assert "util.h" not in queries[0].text
        assert queries[0].text.startswith("c ")

    def test_clip_at_word_boundary(self):
        message = "undefined: " + " ".join(f"symbol{i:03d}" for i in range(60))
        ctx = make_ctx(message=message)
        queries = formulate_queries(ctx, None)
        full = f"go {message}"
        q0 = queries[0]
        assert len(q0.text) <= 256
        assert full.startswith(q0.text)
        assert full[len(q0.text)] == " "

    def test_query_cap_respected(self):
        ctx = make_ctx(deps=[Dependency("github.com/gin-gonic/gin", "v1.9.1")])
        hypo = make_hypo("An unexported helper shadows the package symbol.")
        config = RetrievalConfig(n_queries=2)
        queries = formulate_queries(ctx, hypo, config)
        assert len(queries) == 2
        assert queries[0].origin == frozenset({QueryOrigin.MESSAGE})

    def test_deterministic(self):
        ctx = make_ctx(deps=[Dependency("github.com/gin-gonic/gin", "v1.9.1")])
        hypo = make_hypo("The goroutine channel deadlock comes from sends.")
        assert formulate_queries(ctx, hypo) == formulate_queries(ctx, hypo)


def so_query(text="go undefined: fmt.Printl"):
    return SearchQuery(text=text, target=SourceKind.STACK_OVERFLOW,
                       origin=frozenset({QueryOrigin.MESSAGE}))


class TestSearchSource:
    def record(self, tmp_path, text, docs):
        client = FixtureSourceClient(SourceKind.STACK_OVERFLOW, tmp_path)
        client.store(text, docs)
        return client

    def test_truncates_to_k_in_recorded_order(self, tmp_path):
        docs = [make_doc(url=f"https://example.com/q{i}", body=f"body {i}",
                         source=SourceKind.STACK_OVERFLOW) for i in range(7)]
        client = self.record(tmp_path, "go undefined: fmt.Printl", docs)
        found = search_source(so_query(), client, CONFIG)
        assert [d.url for d in found] == [d.url for d in docs[:5]]

    def test_missing_fixture_is_empty_and_logged(self, tmp_path, caplog):
        client = FixtureSourceClient(SourceKind.STACK_OVERFLOW, tmp_path)
        with caplog.at_level(logging.WARNING, logger="warp.retrieval"):
            found = search_source(so_query(), client, CONFIG)
        assert found == []
        assert "source error" in caplog.text

    def test_error_fixture_is_empty(self, tmp_path, caplog):
        key = request_key(SourceKind.STACK_OVERFLOW, "go undefined: fmt.Printl")
        (tmp_path / f"{key}.json").write_text(
            json.dumps({"error": "rate limited"}))
        client = FixtureSourceClient(SourceKind.STACK_OVERFLOW, tmp_path)
        with caplog.at_level(logging.WARNING, logger="warp.retrieval"):
            found = search_source(so_query(), client, CONFIG)
        assert found == []
        assert "rate limited" in caplog.text

    def test_stall_hits_timeout(self, tmp_path, caplog):
        key = request_key(SourceKind.STACK_OVERFLOW, "go undefined: fmt.Printl")
        (tmp_path / f"{key}.json").write_text(json.dumps({
            "stall_seconds": 0.8,
            "docs": [{"url": "https://example.com/q", "body": "late"}],
        }))
        client = FixtureSourceClient(SourceKind.STACK_OVERFLOW, tmp_path)
        config = RetrievalConfig(per_source_timeout=0.15,
                                 reference_time=REFERENCE_TIME)
        started = time.monotonic()
        with caplog.at_level(logging.WARNING, logger="warp.retrieval"):
            found = search_source(so_query(), client, config)
        assert found == []
        assert time.monotonic() - started < 0.6
        assert "timeout" in caplog.text

    def test_kind_mismatch_rejected(self, tmp_path):
        client = FixtureSourceClient(SourceKind.WEB_SEARCH, tmp_path)
        with pytest.raises(ValueError):
            search_source(so_query(), client, CONFIG)

    def test_duplicate_urls_first_wins(self, tmp_path):
        docs = [
            make_doc(url="https://example.com/a", body="first",
                     source=SourceKind.STACK_OVERFLOW),
            make_doc(url="https://example.com/a", body="second",
                     source=SourceKind.STACK_OVERFLOW),
            make_doc(url="https://example.com/b", body="third",
                     source=SourceKind.STACK_OVERFLOW),
        ]
        client = self.record(tmp_path, "go undefined: fmt.Printl", docs)
        found = search_source(so_query(), client, CONFIG)
        assert [(d.url, d.body) for d in found] == [
            ("https://example.com/a", "first"),
            ("https://example.com/b", "third"),
        ]

    def test_request_key_normalizes_case_and_spacing(self):
        kind = SourceKind.STACK_OVERFLOW
        assert request_key(kind, "Go  Undefined") == request_key(kind, "go undefined")
        assert request_key(kind, "go undefined") != request_key(
            SourceKind.WEB_SEARCH, "go undefined")


class TestHttpClients:
    def test_stackoverflow_mapping(self, monkeypatch):
        calls = []

        def transport(url, params, headers):
            calls.append((url, params, headers))
            return {"items": [{
                "link": "https://stackoverflow.com/q/1",
                "title": "T",
                "body": "B",
                "creation_date": 1_700_000_000,
                "score": 5,
                "is_answered": True,
                "answer_count": 2,
            }]}

        monkeypatch.setenv("WARP_SO_KEY", "k1")
        client = StackOverflowClient(transport=transport)
        docs = client.search("go undefined", 5)
        assert len(docs) == 1
        doc = docs[0]
        assert doc.source is SourceKind.STACK_OVERFLOW
        assert doc.url == "https://stackoverflow.com/q/1"
        assert doc.published_at == 1_700_000_000_000
        assert doc.source_signals["accepted"] == 1.0
        assert doc.source_signals["score"] == 5.0
        url, params, _headers = calls[0]
        assert url.endswith("/search/advanced")
        assert params["q"] == "go undefined"
        assert params["pagesize"] == 5
        assert params["key"] == "k1"

    def test_stackoverflow_no_key_without_env(self, monkeypatch):
        monkeypatch.delenv("WARP_SO_KEY", raising=False)
        calls = []

        def transport(url, params, headers):
            calls.append(params)
            return {"items": []}

        StackOverflowClient(transport=transport).search("q", 3)
        assert "key" not in calls[0]

    def test_github_mapping(self, monkeypatch):
        monkeypatch.setenv("WARP_GH_KEY", "tok")
        calls = []

        def transport(url, params, headers):
            calls.append((url, params, headers))
            return {"items": [{
                "html_url": "https://github.com/o/r/issues/7",
                "title": "T",
                "body": None,
                "created_at": "2023-11-14T22:13:20Z",
                "comments": 3,
                "state": "open",
            }]}

        docs = GitHubIssuesClient(transport=transport).search("q", 4)
        assert docs[0].body == ""
        assert docs[0].published_at == 1_700_000_000_000
        assert docs[0].source is SourceKind.GITHUB_ISSUES
        assert docs[0].source_signals["open"] == 1.0
        _url, _params, headers = calls[0]
        assert headers["Authorization"] == "Bearer tok"

    def test_web_search_mapping(self, monkeypatch):
        monkeypatch.delenv("WARP_WEB_KEY", raising=False)

        def transport(url, params, headers):
            assert headers == {}
            return {"results": [{
                "url": "https://blog.example.dev/x",
                "title": "T",
                "snippet": "S",
                "published": "2023-11-14T22:13:20+00:00",
            }]}

        docs = WebSearchClient("https://search.example/api",
                               transport=transport).search("q", 2)
        assert docs[0].body == "S"
        assert docs[0].published_at == 1_700_000_000_000
        assert docs[0].source is SourceKind.WEB_SEARCH

    def test_transport_failure_wrapped(self):
        def transport(url, params, headers):
            raise RuntimeError("boom")

        with pytest.raises(SourceError):
            StackOverflowClient(transport=transport).search("q", 1)

    def test_search_source_degrades_on_failure(self, caplog):
        def transport(url, params, headers):
            raise RuntimeError("boom")

        client = StackOverflowClient(transport=transport)
        with caplog.at_level(logging.WARNING, logger="warp.retrieval"):
            assert search_source(so_query(), client, CONFIG) == []


class TestChunkDocument:
    def test_short_body_is_one_snippet(self):
        body = ("lorem ipsum dolor sit amet consectetur adipiscing elit "
                "sed do eiusmod tempor incididunt ut labore")
        assert chunk_document(make_doc(body=body)) == [body]

    def test_code_block_never_split(self):
        body = "```go\n" + ("counter := counter + 1\n" * 90) + "```"
        assert len(body) > 2000
        snippets = chunk_document(make_doc(body=body))
        assert snippets == [body]

    def test_three_long_paragraphs_stay_separate(self):
        paragraphs = [
            (f"paragraph{i} " + f"word{i} " * 130).strip() for i in range(3)
        ]
        for p in paragraphs:
            assert 700 <= len(p) <= 1200
        snippets = chunk_document(make_doc(body="\n\n".join(paragraphs)))
        assert snippets == paragraphs

    def test_short_paragraphs_pack_together(self):
        body = "first paragraph here\n\nsecond paragraph here"
        assert chunk_document(make_doc(body=body)) == [
            "first paragraph here\n\nsecond paragraph here"]

    def test_small_code_packs_with_prose(self):
        body = "intro text\n\n```py\nx = 1\n```\n\noutro text"
        snippets = chunk_document(make_doc(body=body))
        assert len(snippets) == 1
        assert "```py" in snippets[0]
        assert "outro text" in snippets[0]

    def test_big_code_forces_boundaries(self):
        code = "```c\n" + ("total += values[i];\n" * 100) + "```"
        body = f"before the block\n\n{code}\n\nafter the block"
        snippets = chunk_document(make_doc(body=body))
        assert snippets == ["before the block", code, "after the block"]

    def test_empty_body_yields_nothing(self):
        assert chunk_document(make_doc(body="")) == []
        assert chunk_document(make_doc(body="   \n \t ")) == []

    def test_long_paragraph_splits_at_whitespace(self):
        body = ("alpha bravo charlie delta echo " * 150).strip()
        snippets = chunk_document(make_doc(body=body))
        assert len(snippets) > 1
        assert all(len(s) <= 1200 for s in snippets)
        assert " ".join(snippets).split() == body.split()

    def test_unbreakable_text_hard_cut(self):
        body = "x" * 3000
        snippets = chunk_document(make_doc(body=body))
        assert [len(s) for s in snippets] == [1200, 1200, 600]
        assert "".join(snippets) == body

    def test_horizontal_rule_is_a_boundary_not_content(self):
        snippets = chunk_document(make_doc(body="first part\n---\nsecond part"))
        assert snippets == ["first part\n\nsecond part"]

    @given(st.text(alphabet=st.characters(codec="ascii"), max_size=400))
    @settings(max_examples=80, deadline=None)
    def test_snippets_never_blank(self, body):
        for snippet in chunk_document(make_doc(body=body)):
            assert snippet.strip()


def brace_window():
    """AST window contributing no identifier tokens, so similarity
    depends on the message alone."""
    return "{ }"


def scoring_ctx(message, language=LanguageId.PYTHON, error_id="PY_NAME_ERROR"):
    return make_ctx(language=language, message=message, error_id=error_id,
                    ast_snippet=brace_window())


class TestScoreEvidence:
    def test_all_components_maxed(self):
        ctx = scoring_ctx("alpha bravo charlie")
        doc = make_doc(url="https://docs.python.org/3/tutorial",
                       body=ctx.raw_message, published_at=REFERENCE_TIME)
        ev = score_evidence(ctx.raw_message, ctx, doc, CONFIG)
        assert ev.components == ScoreComponents(1.0, 1.0, 1.0, 1.0)
        assert ev.score == pytest.approx(1.0, abs=1e-12)

    def test_hand_computed_weighted_sums(self):
        w = ScoreWeights()
        year_ago = REFERENCE_TIME - 365 * MS_PER_DAY
        four_years = REFERENCE_TIME - 4 * 365 * MS_PER_DAY
        cases = [
            (
                "maxed",
                scoring_ctx("alpha bravo charlie"),
                "alpha bravo charlie",
                make_doc(url="https://docs.python.org/3/x",
                         body="alpha bravo charlie",
                         published_at=REFERENCE_TIME),
                (1.0, 1.0, 1.0, 1.0),
                1.0,
            ),
            (
                "half-overlap",
                scoring_ctx("alpha bravo"),
                "alpha charlie",
                make_doc(url="https://stackoverflow.com/q/1",
                         body="alpha charlie",
                         source=SourceKind.STACK_OVERFLOW,
                         signals={"accepted": 0.0}),
                (0.5, 0.5, 0.7, 0.5),
                w.similarity * 0.5 + w.keyword * 0.5
                + w.reputation * 0.7 + w.recency * 0.5,
            ),
            (
                "disjoint",
                scoring_ctx("alpha bravo"),
                "delta echo",
                make_doc(url="https://github.com/o/r/issues/2",
                         body="delta echo",
                         source=SourceKind.GITHUB_ISSUES),
                (0.0, 0.0, 0.8, 0.5),
                w.reputation * 0.8 + w.recency * 0.5,
            ),
            (
                "quarter-overlap",
                scoring_ctx("alpha bravo charlie delta"),
                "delta echo foxtrot golf",
                make_doc(url="https://stackoverflow.com/q/3",
                         body="delta echo foxtrot golf",
                         source=SourceKind.STACK_OVERFLOW,
                         signals={"accepted": 1.0},
                         published_at=year_ago),
                (0.25, 0.25, 0.9, 2.0 ** -0.5),
                w.similarity * 0.25 + w.keyword * 0.25
                + w.reputation * 0.9 + w.recency * 2.0 ** -0.5,
            ),
            (
                "official-but-old",
                scoring_ctx("alpha bravo"),
                "alpha bravo",
                make_doc(url="https://docs.python.org/3/y",
                         body="alpha bravo", published_at=four_years),
                (1.0, 1.0, 1.0, 0.25),
                w.similarity + w.keyword + w.reputation + w.recency * 0.25,
            ),
        ]
        for name, ctx, snippet, doc, components, expected in cases:
            ev = score_evidence(snippet, ctx, doc, CONFIG)
            got = (ev.components.similarity, ev.components.keyword,
                   ev.components.reputation, ev.components.recency)
            for actual, wanted in zip(got, components):
                assert actual == pytest.approx(wanted, abs=1e-12), name
            assert ev.score == pytest.approx(expected, abs=1e-12), name

    def test_disjoint_vocabulary_zeroes(self):
        ctx = scoring_ctx("alpha bravo")
        ev = score_evidence("delta echo", ctx,
                            make_doc(body="delta echo"), CONFIG)
        assert ev.components.similarity == 0.0
        assert ev.components.keyword == 0.0

    def test_recency_half_life_points(self):
        half = REFERENCE_TIME - 730 * MS_PER_DAY
        assert recency_score(half, 730.0, REFERENCE_TIME) == pytest.approx(
            0.5, abs=1e-12)
        two_half_lives = REFERENCE_TIME - 1460 * MS_PER_DAY
        assert recency_score(two_half_lives, 730.0, REFERENCE_TIME) == (
            pytest.approx(0.25, abs=1e-12))
        assert recency_score(None, 730.0, REFERENCE_TIME) == 0.5
        future = REFERENCE_TIME + MS_PER_DAY
        assert recency_score(future, 730.0, REFERENCE_TIME) == 1.0

    @pytest.mark.parametrize("url,source,signals,expected", [
        ("https://docs.python.org/3/library/exceptions.html",
         SourceKind.WEB_SEARCH, {}, 1.0),
        ("https://pkg.go.dev/fmt", SourceKind.WEB_SEARCH, {}, 1.0),
        ("https://en.cppreference.com/w/c", SourceKind.WEB_SEARCH, {}, 1.0),
        ("https://stackoverflow.com/q/1", SourceKind.STACK_OVERFLOW,
         {"accepted": 1.0}, 0.9),
        ("https://stackoverflow.com/q/2", SourceKind.STACK_OVERFLOW,
         {"accepted": 0.0}, 0.7),
        ("https://stackoverflow.com/q/3", SourceKind.STACK_OVERFLOW, {}, 0.7),
        ("https://github.com/o/r/issues/1", SourceKind.GITHUB_ISSUES, {}, 0.8),
        ("https://blog.example.dev/post", SourceKind.WEB_SEARCH, {}, 0.5),
        ("https://docs.python.org.evil.example/x", SourceKind.WEB_SEARCH,
         {}, 0.5),
    ])
    def test_reputation_table(self, url, source, signals, expected):
        doc = make_doc(url=url, source=source, signals=signals)
        assert reputation_score(doc) == expected

    def test_evidence_id_stable(self):
        a = evidence_id("https://example.com/a", "text")
        assert a == evidence_id("https://example.com/a", "text")
        assert a != evidence_id("https://example.com/a", "other")
        assert a.startswith("ev-") and len(a) == 15

    @given(
        snippet=st.lists(
            st.sampled_from(["alpha", "bravo", "charlie", "delta", "echo"]),
            min_size=1, max_size=12).map(" ".join),
        source=st.sampled_from(list(SourceKind)),
        accepted=st.sampled_from([0.0, 1.0]),
        age_days=st.one_of(st.none(), st.integers(min_value=0, max_value=5000)),
    )
    @settings(max_examples=80, deadline=None)
    def test_score_bounds_and_linearity(self, snippet, source, accepted,
                                        age_days):
        ctx = scoring_ctx("alpha bravo charlie")
        published = (None if age_days is None
                     else REFERENCE_TIME - age_days * MS_PER_DAY)
        doc = make_doc(url="https://example.com/x", body=snippet,
                       source=source, published_at=published,
                       signals={"accepted": accepted})
        ev = score_evidence(snippet, ctx, doc, CONFIG)
        c = ev.components
        for value in (c.similarity, c.keyword, c.reputation, c.recency):
            assert 0.0 <= value <= 1.0
        w = CONFIG.weights
        manual = (w.similarity * c.similarity + w.keyword * c.keyword
                  + w.reputation * c.reputation + w.recency * c.recency)
        assert ev.score == pytest.approx(manual, abs=1e-12)


def make_snippet(text, score, url, published_at=None):
    """Candidate with all components equal to the score, keeping the
    weighted-sum invariant trivially true."""
    return EvidenceSnippet(
        id=evidence_id(url, text), text=text, url=url,
        source=SourceKind.WEB_SEARCH, published_at=published_at,
        components=ScoreComponents(score, score, score, score), score=score)


def brute_force_ids(candidates, config):
    """Exhaustive reference for the greedy dedup selection: among all
    feasible subsets (pairwise below the threshold, maximal unless the
    cap is hit), take the lexicographically first by rank position."""
    ordered = sorted(candidates, key=selection_order_key)
    grams = [word_ngrams(c.text) for c in ordered]
    n = len(ordered)

    def compatible(combo):
        return all(jaccard(grams[i], grams[j]) < config.dedup_jaccard
                   for i, j in itertools.combinations(combo, 2))

    def extendable(combo):
        taken = set(combo)
        return any(
            compatible(combo + (j,))
            for j in range(n) if j not in taken
        )

    feasible = []
    for size in range(0, min(n, config.m_prime) + 1):
        for combo in itertools.combinations(range(n), size):
            if not compatible(combo):
                continue
            if size < config.m_prime and extendable(combo):
                continue
            feasible.append(combo)
    best = min(feasible)
    return [ordered[i].id for i in best]


class TestSelectEvidenceSet:
    def test_exact_duplicate_dropped(self):
        text = "identical words repeated for the redundancy check here"
        high = make_snippet(text, 0.9, "https://example.com/a")
        low = make_snippet(text, 0.8, "https://example.com/b")
        result = select_evidence_set([low, high], CONFIG)
        assert result.ids == (high.id,)
        assert len(result.selection_log) == 1
        drop = result.selection_log[0]
        assert drop.dropped_id == low.id
        assert drop.kept_id == high.id
        assert drop.jaccard == 1.0

    def test_under_capacity_in_score_order(self):
        snippets = [
            make_snippet("alpha writes the first entirely distinct sentence",
                         0.5, "https://example.com/1"),
            make_snippet("bravo offers another unrelated run of words",
                         0.9, "https://example.com/2"),
            make_snippet("charlie closes with different content again",
                         0.7, "https://example.com/3"),
        ]
        result = select_evidence_set(snippets, CONFIG)
        assert [s.score for s in result.snippets] == [0.9, 0.7, 0.5]
        assert result.selection_log == ()

    def test_cap_at_m_prime(self):
        snippets = [
            make_snippet(f"wholly distinct sentence number {i} "
                         f"with unique token token{i}",
                         round(0.99 - i * 0.05, 2),
                         f"https://example.com/{i}")
            for i in range(12)
        ]
        result = select_evidence_set(snippets, CONFIG)
        assert len(result.snippets) == 8
        scores = [s.score for s in result.snippets]
        assert scores == sorted(scores, reverse=True)
        assert result.ids == tuple(s.id for s in snippets[:8])

    def test_tie_breaks_newer_then_url(self):
        dated = make_snippet("one common tie sentence variant alpha", 0.5,
                             "https://example.com/z", REFERENCE_TIME)
        older = make_snippet("two common tie sentence variant bravo", 0.5,
                             "https://example.com/y",
                             REFERENCE_TIME - MS_PER_DAY)
        undated = make_snippet("three common tie sentence variant charlie",
                               0.5, "https://example.com/a")
        result = select_evidence_set([undated, older, dated], CONFIG)
        assert result.ids == (dated.id, older.id, undated.id)

    def test_near_duplicate_above_threshold_dropped(self):
        words = [f"w{i}" for i in range(20)]
        base = " ".join(words)
        tail_changed = " ".join(words[:-1] + ["different"])
        kept = make_snippet(base, 0.9, "https://example.com/a")
        dup = make_snippet(tail_changed, 0.8, "https://example.com/b")
        result = select_evidence_set([kept, dup], CONFIG)
        assert result.ids == (kept.id,)
        assert result.selection_log[0].jaccard >= 0.8

    def test_distinct_middle_edit_survives(self):
        words = [f"w{i}" for i in range(20)]
        base = " ".join(words)
        middle_changed = " ".join(words[:10] + ["different"] + words[11:])
        a = make_snippet(base, 0.9, "https://example.com/a")
        b = make_snippet(middle_changed, 0.8, "https://example.com/b")
        result = select_evidence_set([a, b], CONFIG)
        assert result.ids == (a.id, b.id)

    def test_matches_brute_force_on_engineered_set(self):
        words = [f"token{i}" for i in range(30)]
        base = " ".join(words[:20])
        candidates = [
            make_snippet(base, 0.95, "https://example.com/0"),
            make_snippet(" ".join(words[:19] + ["changed"]), 0.90,
                         "https://example.com/1"),
            make_snippet(" ".join(words[10:30]), 0.85,
                         "https://example.com/2"),
            make_snippet(" ".join(words[9:29]), 0.80,
                         "https://example.com/3"),
            make_snippet("entirely fresh sentence one", 0.75,
                         "https://example.com/4"),
            make_snippet("entirely fresh sentence one", 0.70,
                         "https://example.com/5"),
            make_snippet("another unrelated remark", 0.65,
                         "https://example.com/6"),
            make_snippet("short words only", 0.60, "https://example.com/7"),
            make_snippet("short words only", 0.60, "https://example.com/8"),
            make_snippet("completely separate topic nine", 0.55,
                         "https://example.com/9"),
            make_snippet("completely separate topic ten", 0.50,
                         "https://example.com/10"),
            make_snippet("final filler candidate", 0.45,
                         "https://example.com/11"),
        ]
        result = select_evidence_set(candidates, CONFIG)
        assert list(result.ids) == brute_force_ids(candidates, CONFIG)

    @given(
        data=st.lists(
            st.tuples(
                st.lists(st.sampled_from([f"w{i}" for i in range(8)]),
                         min_size=1, max_size=9).map(" ".join),
                st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]),
                st.sampled_from([None, REFERENCE_TIME,
                                 REFERENCE_TIME - MS_PER_DAY]),
            ),
            min_size=0, max_size=10),
        m_prime=st.integers(min_value=1, max_value=4),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_on_random_sets(self, data, m_prime):
        config = RetrievalConfig(m_prime=m_prime,
                                 reference_time=REFERENCE_TIME)
        candidates = [
            make_snippet(text, score, f"https://example.com/{i}", published)
            for i, (text, score, published) in enumerate(data)
        ]
        result = select_evidence_set(candidates, config)
        assert list(result.ids) == brute_force_ids(candidates, config)

    def test_admitted_set_invariants(self):
        words = [f"w{i}" for i in range(20)]
        candidates = [
            make_snippet(" ".join(words[i:i + 10]), 0.9 - 0.05 * i,
                         f"https://example.com/{i}")
            for i in range(10)
        ]
        result = select_evidence_set(candidates, CONFIG)
        for a, b in itertools.combinations(result.snippets, 2):
            assert jaccard(word_ngrams(a.text), word_ngrams(b.text)) < 0.8

    def test_empty_input(self):
        result = select_evidence_set([], CONFIG)
        assert result.snippets == ()
        assert result.selection_log == ()


class TestGatherEvidence:
    def test_end_to_end_scoring_and_selection(self):
        ctx = make_ctx()
        relevant = make_doc(
            url="https://stackoverflow.com/q/1",
            body=("The compiler reports undefined: fmt.Printl because the "
                  "fmt package has no Printl export; call fmt.Println."),
            source=SourceKind.STACK_OVERFLOW, signals={"accepted": 1.0})
        unrelated = make_doc(
            url="https://blog.example.dev/gc-tuning",
            body="Garbage collector tuning rarely matters for small services.")
        result = gather_evidence(ctx, [relevant, unrelated], CONFIG)
        assert len(result.snippets) == 2
        assert result.snippets[0].url == relevant.url
        assert result.snippets[0].score > result.snippets[1].score

    def test_duplicate_urls_scored_once(self):
        ctx = make_ctx()
        first = make_doc(url="https://example.com/a", body="fmt.Printl typo")
        second = make_doc(url="https://example.com/a",
                          body="entirely different body")
        result = gather_evidence(ctx, [first, second], CONFIG)
        assert len(result.snippets) == 1
        assert result.snippets[0].text == "fmt.Printl typo"

    def test_no_docs_degrades_to_empty_set(self):
        result = gather_evidence(make_ctx(), [], CONFIG)
        assert result.snippets == ()
        assert result.ids == ()

    def test_deterministic(self):
        ctx = make_ctx()
        docs = [
            make_doc(url="https://example.com/a", body="fmt.Printl is a typo"),
            make_doc(url="https://example.com/b",
                     body="undefined identifier hints"),
        ]
        assert gather_evidence(ctx, docs, CONFIG) == gather_evidence(
            ctx, docs, CONFIG)


def load_ndcg_cases():
    payload = json.loads(
        (FIXTURES / "retrieval" / "ndcg_cases.json").read_text())
    assert len(payload) >= 10
    return payload


class TestRankingQuality:
    """Hand-labeled relevance corpus: the lexical scorer must place
    genuinely helpful documents in the top ranks."""

    def rank_case(self, case):
        ctx = make_ctx(
            language=LanguageId(case["language"]),
            message=case["raw_message"],
            error_id=case["error_id"],
            ast_snippet=case["ast_snippet"],
        )
        candidates = []
        for raw in case["docs"]:
            doc = make_doc(url=raw["url"], body=raw["body"],
                           source=SourceKind(raw["source"]),
                           published_at=raw.get("published_at"),
                           signals=raw.get("source_signals", {}),
                           title=raw["title"])
            snippets = chunk_document(doc)
            assert len(snippets) == 1, (case["name"], raw["url"])
            candidates.append(score_evidence(snippets[0], ctx, doc, CONFIG))
        ranked = sorted(candidates, key=selection_order_key)
        return [c.url for c in ranked]

    def test_ndcg_at_3_meets_floor(self):
        cases = load_ndcg_cases()
        per_case = {}
        for case in cases:
            ranked_urls = self.rank_case(case)
            per_case[case["name"]] = ndcg_at_3(ranked_urls,
                                               case["relevant_urls"])
        mean = sum(per_case.values()) / len(per_case)
        assert mean >= 0.70, per_case

    def test_every_case_ranks_a_relevant_doc_in_top_3(self):
        for case in load_ndcg_cases():
            ranked = self.rank_case(case)[:3]
            relevant = set(case["relevant_urls"])
            assert relevant & set(ranked), case["name"]
