"""Evaluation driver: run adapters over instances, score every cell,
aggregate per-system rows into a deterministic report."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from ..diffs import diffs_equivalent
from ..errors import SandboxFailure
from .adapters import RepairResult, SystemAdapter
from .dataset import BenchmarkInstance, dataset_hash
from .metrics import bleu4, mrr, ndcg_at_3, rouge_l
from .report import EvalReport, SystemRow
from .sandbox import SandboxSpec, compiles_correctly

log = logging.getLogger("warp.eval")

METRIC_VARIANTS = {
    "bleu_smoothing": "add-1 for n>=2",
    "rouge_beta": 1.2,
    "ndcg_gain": "binary",
}


@dataclass(frozen=True)
class CellScore:
    exact: bool
    compiled: Optional[bool]
    semantic: Optional[bool]
    sandbox_failed: bool
    bleu: float
    rouge: float
    ndcg: float
    first_correct_rank: Optional[int]
    latency_ms: int


def score_cell(instance: BenchmarkInstance, result: RepairResult,
               sandbox: SandboxSpec) -> CellScore:
    """Score one adapter's answer to one instance.  Sandbox breakage is
    recorded, never propagated; the compile verdict is then unassessed."""
    top = result.solutions[0] if result.solutions else None
    exact = bool(top and diffs_equivalent(top.fix, instance.ground_truth_diff,
                                          instance.erroneous_code))

    compiled: Optional[bool] = False
    semantic: Optional[bool] = None
    sandbox_failed = False
    if top is not None:
        try:
            check = compiles_correctly(instance, top, sandbox)
            compiled, semantic = check.compiled, check.semantically_correct
        except SandboxFailure as exc:
            log.warning("sandbox unavailable for %s: %s", instance.id, exc)
            compiled, sandbox_failed = None, True

    first_correct = None
    for position, solution in enumerate(result.solutions, start=1):
        if diffs_equivalent(solution.fix, instance.ground_truth_diff,
                            instance.erroneous_code):
            first_correct = position
            break

    return CellScore(
        exact=exact,
        compiled=compiled,
        semantic=semantic,
        sandbox_failed=sandbox_failed,
        bleu=bleu4(top.explanation, instance.reference_explanation) if top else 0.0,
        rouge=rouge_l(top.explanation, instance.reference_explanation) if top else 0.0,
        ndcg=ndcg_at_3(list(result.evidence_ranking), set(instance.verified_urls)),
        first_correct_rank=first_correct,
        latency_ms=result.latency_ms,
    )


def _aggregate(system: str, cells: Sequence[CellScore]) -> SystemRow:
    n = len(cells)
    compile_results = [c.compiled for c in cells if c.compiled is not None]
    semantic_results = [c.semantic for c in cells if c.semantic is not None]

    def pct(values: Sequence[bool]) -> Optional[float]:
        return 100.0 * sum(values) / len(values) if values else None

    return SystemRow(
        system=system,
        instances=n,
        exact_match_pct=100.0 * sum(c.exact for c in cells) / n,
        compiles_correctly_pct=pct(compile_results),
        semantic_correctness_pct=pct(semantic_results),
        bleu4=sum(c.bleu for c in cells) / n,
        rouge_l=sum(c.rouge for c in cells) / n,
        ndcg_at_3=sum(c.ndcg for c in cells) / n,
        mrr=mrr([c.first_correct_rank for c in cells]),
        mean_latency_s=sum(c.latency_ms for c in cells) / n / 1000.0,
        compiles_assessed=len(compile_results),
        semantic_assessed=len(semantic_results),
        sandbox_failures=sum(c.sandbox_failed for c in cells),
    )


def run_evaluation(adapters: Sequence[SystemAdapter],
                   instances: Sequence[BenchmarkInstance],
                   sandbox: SandboxSpec = SandboxSpec(),
                   parallelism: int = 1) -> EvalReport:
    """Evaluate every adapter over every instance.  Cells run
    left-to-right per adapter (optionally in parallel); aggregation
    order is fixed by input order, so identical inputs give a
    byte-identical report."""
    if not adapters:
        raise ValueError("at least one adapter required")
    if not instances:
        raise ValueError("at least one instance required")

    def cell(adapter: SystemAdapter, instance: BenchmarkInstance) -> CellScore:
        return score_cell(instance, adapter.repair(instance), sandbox)

    rows = []
    for adapter in adapters:
        if parallelism > 1:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                cells = list(pool.map(lambda i: cell(adapter, i), instances))
        else:
            cells = [cell(adapter, instance) for instance in instances]
        rows.append(_aggregate(adapter.identity, cells))

    config = {
        **METRIC_VARIANTS,
        "wall_clock_limit_s": sandbox.wall_clock_limit_s,
        "network_disabled": sandbox.network_disabled,
        "parallelism": parallelism,
    }
    return EvalReport(rows=tuple(rows),
                      dataset_hash=dataset_hash(tuple(instances)),
                      config=config)
