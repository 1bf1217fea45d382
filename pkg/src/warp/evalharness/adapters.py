"""Repair-system adapters: the harness scores anything that can turn a
benchmark instance into ranked solutions."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

from ..diffs import UnifiedDiff
from ..synthesis import FinalSolution, Provenance
from .dataset import BenchmarkInstance


@dataclass(frozen=True)
class RepairResult:
    solutions: tuple[FinalSolution, ...]
    evidence_ranking: tuple[str, ...]
    latency_ms: int

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be non-negative")


class SystemAdapter(ABC):
    """A repair system under evaluation.  repair() must be total: a
    system that cannot help returns empty solutions, never raises."""

    @property
    @abstractmethod
    def identity(self) -> str: ...

    @abstractmethod
    def repair(self, instance: BenchmarkInstance) -> RepairResult: ...


class OracleAdapter(SystemAdapter):
    """Upper bound: answers with the ground truth."""

    @property
    def identity(self) -> str:
        return "oracle"

    def repair(self, instance: BenchmarkInstance) -> RepairResult:
        solution = FinalSolution(
            fix=instance.ground_truth_diff,
            explanation=instance.reference_explanation,
            citations=(),
            confidence=1.0,
            rank=1,
            provenance=Provenance.SYNTHESIZED,
        )
        return RepairResult(solutions=(solution,),
                            evidence_ranking=instance.verified_urls,
                            latency_ms=0)


class NullAdapter(SystemAdapter):
    """Lower bound: proposes the empty diff and no evidence."""

    @property
    def identity(self) -> str:
        return "null"

    def repair(self, instance: BenchmarkInstance) -> RepairResult:
        solution = FinalSolution(
            fix=UnifiedDiff(),
            explanation="No fix attempted.",
            citations=(),
            confidence=0.0,
            rank=1,
            provenance=Provenance.HYPOTHESIS_ONLY,
        )
        return RepairResult(solutions=(solution,), evidence_ranking=(),
                            latency_ms=0)
