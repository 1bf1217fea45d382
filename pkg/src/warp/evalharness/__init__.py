"""Benchmark harness: dataset loading, sandboxed checks, metrics, reports."""

from .adapters import NullAdapter, OracleAdapter, RepairResult, SystemAdapter
from .dataset import (
    BenchmarkInstance,
    BenchmarkLoad,
    UnitTestSpec,
    dataset_hash,
    instance_to_record,
    load_benchmark,
    parse_instance,
)
from .metrics import bleu4, mrr, ndcg_at_3, rouge_l
from .report import EvalReport, SystemRow, render_report_table
from .runner import CellScore, run_evaluation, score_cell
from .sandbox import CompileCheck, SandboxSpec, compiles_correctly

__all__ = [
    "BenchmarkInstance",
    "BenchmarkLoad",
    "CellScore",
    "CompileCheck",
    "EvalReport",
    "NullAdapter",
    "OracleAdapter",
    "RepairResult",
    "SandboxSpec",
    "SystemAdapter",
    "SystemRow",
    "UnitTestSpec",
    "bleu4",
    "compiles_correctly",
    "dataset_hash",
    "instance_to_record",
    "load_benchmark",
    "mrr",
    "ndcg_at_3",
    "parse_instance",
    "render_report_table",
    "rouge_l",
    "run_evaluation",
    "score_cell",
]
