#!/usr/bin/env python3
"""Generate replay fixtures for the shipped mini-benchmark.

For every benchmark instance this records: the hypothesis completion
(keyed by prompt hash), a set of web documents for each query the
pipeline will issue, and the synthesis completion for the exact
evidence those documents produce.  With `benchmarks/replay.yaml` the
full pipeline then runs with no generation backend and no network, and
produces the same bytes every time.

Order matters: all web fixtures are written before any synthesis
prompt is rendered, because instances can share a query key and the
synthesis prompt must see the final merged document list.

Run from the repository root:  python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import shutil
import sys
from pathlib import Path
from urllib.parse import urlparse

from warp.diffs import diffs_equivalent, format_diff
from warp.evalharness import load_benchmark, run_evaluation, NullAdapter, OracleAdapter
from warp.hypothesis import Completion, ReplayBackend, generate_hypothesis, render_hypothesis_prompt
from warp.retrieval import SourceKind, formulate_queries, gather_evidence
from warp.retrieval.queries import QueryOrigin
from warp.retrieval.scoring import OFFICIAL_DOC_DOMAINS
from warp.retrieval.sources import (
    FixtureSourceClient,
    SearchResultDoc,
    request_key,
    search_source,
)
from warp.service import PipelineAdapter, build_services, instance_context, load_config
from warp.synthesis import Provenance, render_synthesis_prompt

ROOT = Path(__file__).resolve().parent.parent
BENCH = ROOT / "benchmarks"
CONFIG_PATH = BENCH / "replay.yaml"

HYPOTHESIS_CONFIDENCE = 0.8
SYNTHESIS_CONFIDENCE = 0.9

SO_PUBLISHED = 1678838400000  # 2023-03-15
OFFICIAL_PUBLISHED = 1704844800000  # 2024-01-10
BLOG_PUBLISHED = 1660953600000  # 2022-08-20


def is_official(url: str) -> bool:
    host = (urlparse(url).hostname or "").lower()
    return any(host == d or host.endswith("." + d) for d in OFFICIAL_DOC_DOMAINS)


def hypothesis_completion(instance) -> str:
    return (
        f"{instance.reference_explanation}\n"
        f"```diff\n{format_diff(instance.ground_truth_diff)}```\n"
        f"Confidence: {HYPOTHESIS_CONFIDENCE}\n"
    )


def synthesis_completion(instance, cited_ids) -> str:
    markers = " ".join(f"[ev:{cid}]" for cid in cited_ids)
    return (
        f"{instance.reference_explanation} "
        f"The gathered references agree on this fix {markers}.\n"
        f"```diff\n{format_diff(instance.ground_truth_diff)}```\n"
        f"Evidence-Used: {', '.join(cited_ids)}\n"
        f"Confidence: {SYNTHESIS_CONFIDENCE}\n"
    )


def stackoverflow_doc(instance, ctx, index: int) -> SearchResultDoc:
    url = next(
        (u for u in instance.verified_urls if "stackoverflow.com" in u),
        f"https://stackoverflow.com/questions/{70000000 + index}",
    )
    lang = ctx.language.display_name
    return SearchResultDoc(
        url=url,
        title=f"{lang}: {ctx.raw_message}",
        body=(
            f"I'm building a small {lang} project and the compiler stops with:\n\n"
            f"    {ctx.raw_message}\n\n"
            f"The build worked before my last edit. What does this message "
            f"mean and what is the correct fix?\n\n"
            f"Accepted answer: {instance.reference_explanation} "
            f"After making that change the build completes cleanly."
        ),
        source=SourceKind.STACK_OVERFLOW,
        published_at=SO_PUBLISHED,
        source_signals={"accepted": 1.0, "votes": 87.0},
    )


def reference_doc(instance, ctx, index: int) -> SearchResultDoc:
    """Rule-2 result: official documentation when the instance lists one."""
    url = next((u for u in instance.verified_urls if is_official(u)), None)
    if url is None:
        url = f"https://compilererrors.dev/{ctx.language.value.lower()}/{instance.id}"
    headline = ctx.error_id.id.split("_", 1)[-1].replace("_", " ").lower()
    return SearchResultDoc(
        url=url,
        title=f"{ctx.language.display_name} {headline}",
        body=(
            f"{ctx.language.display_name} diagnostics: {headline}.\n\n"
            f'Compilers report "{ctx.raw_message}" for this class of '
            f"mistake. {instance.reference_explanation} "
            f"Fix the flagged statement, then rebuild to confirm the "
            f"diagnostic is gone."
        ),
        source=SourceKind.WEB_SEARCH,
        published_at=OFFICIAL_PUBLISHED,
    )


def blog_doc(instance, ctx) -> SearchResultDoc:
    """Rule-4 result: keyword search hit on the hypothesis explanation."""
    return SearchResultDoc(
        url=f"https://dev.to/buildnotes/{instance.id}",
        title=f'Fixing "{ctx.raw_message}" in {ctx.language.display_name}',
        body=(
            f'Notes on the {ctx.language.display_name} error '
            f'"{ctx.raw_message}".\n\n'
            f"{instance.reference_explanation} The compiler points at "
            f"line {ctx.line}; check the highlighted statement against "
            f"the surrounding code and rebuild."
        ),
        source=SourceKind.WEB_SEARCH,
        published_at=BLOG_PUBLISHED,
    )


def craft_docs(query, instance, ctx, index: int) -> list[SearchResultDoc]:
    if query.target is SourceKind.STACK_OVERFLOW:
        return [stackoverflow_doc(instance, ctx, index)]
    if QueryOrigin.HYPOTHESIS_KEYWORDS in query.origin:
        return [blog_doc(instance, ctx)]
    return [reference_doc(instance, ctx, index)]


def run_queries(queries, clients, retrieval, already_run: set[str]) -> list:
    """Sequential mirror of the pipeline's query dispatch (same order,
    same dedup by request key)."""
    docs = []
    for query in queries:
        key = request_key(query.target, query.text)
        if key in already_run:
            continue
        client = clients.get(query.target)
        if client is None:
            continue
        already_run.add(key)
        docs.extend(search_source(query, client, retrieval))
    return docs


def main() -> int:
    config = load_config(CONFIG_PATH)
    load = load_benchmark(BENCH / "mini.jsonl")
    if load.errors:
        raise SystemExit(f"benchmark has invalid records: {load.errors}")
    instances = load.instances

    for spec in (config.hypothesis_backend, config.synthesis_backend):
        shutil.rmtree(spec.fixture_dir, ignore_errors=True)
    for source in config.sources.values():
        shutil.rmtree(source.fixture_dir, ignore_errors=True)

    hypothesis_backend = ReplayBackend(config.hypothesis_backend.fixture_dir)
    synthesis_backend = ReplayBackend(config.synthesis_backend.fixture_dir)
    fixture_clients = {
        kind: FixtureSourceClient(kind, spec.fixture_dir)
        for kind, spec in config.sources.items()
    }

    # Pass 1: hypothesis completions, then every query's documents.
    contexts, hypotheses = {}, {}
    docs_by_key: dict[str, tuple[SourceKind, str, list[SearchResultDoc]]] = {}
    for index, instance in enumerate(instances):
        ctx = instance_context(instance, config.extraction)
        prompt = render_hypothesis_prompt(ctx, config.hypothesis_budget)
        hypothesis_backend.store(
            prompt.rendered, Completion(text=hypothesis_completion(instance))
        )
        hypo = generate_hypothesis(prompt, hypothesis_backend)
        contexts[instance.id], hypotheses[instance.id] = ctx, hypo

        seen: set[str] = set()
        queries = formulate_queries(ctx, None, config.retrieval)
        queries += formulate_queries(ctx, hypo, config.retrieval)
        for query in queries:
            key = request_key(query.target, query.text)
            if key in seen:
                continue
            seen.add(key)
            entry = docs_by_key.setdefault(key, (query.target, query.text, []))
            entry[2].extend(craft_docs(query, instance, ctx, index))

    for kind, query_text, docs in docs_by_key.values():
        unique, seen_urls = [], set()
        for doc in docs:
            if doc.url in seen_urls:
                continue
            seen_urls.add(doc.url)
            unique.append(doc)
        fixture_clients[kind].store(query_text, unique)

    # Pass 2: synthesis completions against the final fixture state.
    for instance in instances:
        ctx, hypo = contexts[instance.id], hypotheses[instance.id]
        already: set[str] = set()
        docs = run_queries(
            formulate_queries(ctx, None, config.retrieval),
            fixture_clients, config.retrieval, already,
        )
        docs += run_queries(
            formulate_queries(ctx, hypo, config.retrieval),
            fixture_clients, config.retrieval, already,
        )
        evidence = gather_evidence(ctx, docs, config.retrieval)
        if not evidence.snippets:
            raise SystemExit(f"{instance.id}: no evidence selected")
        prompt = render_synthesis_prompt(ctx, hypo, evidence, config.synthesis_budget)
        cited = list(prompt.included_evidence_ids[:2])
        if not cited:
            raise SystemExit(f"{instance.id}: no evidence fit the prompt budget")
        synthesis_backend.store(
            prompt.rendered,
            Completion(text=synthesis_completion(instance, cited)),
        )

    # Pass 3: verify the replayed pipeline end to end.
    services, _ = build_services(config)
    adapter = PipelineAdapter(services)
    for instance in instances:
        result = adapter.repair(instance)
        assert result.solutions, f"{instance.id}: no solutions"
        top = result.solutions[0]
        assert top.provenance is Provenance.SYNTHESIZED, (
            f"{instance.id}: top solution is {top.provenance}"
        )
        assert top.citations, f"{instance.id}: no citations"
        assert diffs_equivalent(
            top.fix, instance.ground_truth_diff, instance.erroneous_code
        ), f"{instance.id}: fix does not match ground truth"

    reports = []
    for _ in range(2):
        fresh, _ = build_services(config)
        adapters = [OracleAdapter(), NullAdapter(), PipelineAdapter(fresh)]
        reports.append(run_evaluation(adapters, instances).to_json())
    assert reports[0] == reports[1], "replayed evaluation is not byte-stable"

    stored = sum(1 for _ in Path(config.hypothesis_backend.fixture_dir).glob("*.json"))
    web = sum(
        1
        for spec in config.sources.values()
        for _ in Path(spec.fixture_dir).glob("*.json")
    )
    print(f"fixtures: {stored} hypothesis, {stored} synthesis prompts expected, "
          f"{web} web responses; replay verified on {len(instances)} instances")
    return 0


if __name__ == "__main__":
    sys.exit(main())
