"""Dataset loading, sandbox checks, adapters, and evaluation runs."""

import json
import shutil
from pathlib import Path

import pytest

from warp.diagnostics import LanguageId
from warp.diffs import UnifiedDiff, parse_unified_diff, render_diff
from warp.errors import DatasetUnreadable, SandboxFailure
from warp.evalharness import (
    BenchmarkInstance,
    NullAdapter,
    OracleAdapter,
    RepairResult,
    SandboxSpec,
    UnitTestSpec,
    compiles_correctly,
    dataset_hash,
    instance_to_record,
    load_benchmark,
    parse_instance,
    render_report_table,
    run_evaluation,
)
from warp.synthesis import FinalSolution, Provenance

BENCHMARK = Path(__file__).resolve().parent.parent / "benchmarks" / "mini.jsonl"

LOAD = load_benchmark(BENCHMARK)
BY_ID = {instance.id: instance for instance in LOAD.instances}


def instance(instance_id):
    return BY_ID[instance_id]


def solution_with(fix):
    return FinalSolution(fix=fix, explanation="Proposed fix.", citations=(),
                         confidence=0.5, provenance=Provenance.SYNTHESIZED)


def oracle_solution(inst):
    return solution_with(inst.ground_truth_diff)


class TestLoadBenchmark:
    def test_mini_benchmark_loads_clean(self):
        assert len(LOAD.instances) == 20
        assert LOAD.errors == ()

    def test_language_mix(self):
        counts = {}
        for inst in LOAD.instances:
            counts[inst.language] = counts.get(inst.language, 0) + 1
        assert counts[LanguageId.C] == 6
        assert counts[LanguageId.CPP] == 3
        assert counts[LanguageId.PYTHON] == 6
        assert counts[LanguageId.GO] == 5

    def test_ground_truth_applies_everywhere(self):
        for inst in LOAD.instances:
            assert inst.fixed_code != inst.erroneous_code

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        load = load_benchmark(path)
        assert load.instances == () and load.errors == ()

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(DatasetUnreadable):
            load_benchmark(tmp_path / "absent.jsonl")

    def test_mispatching_diff_rejected_others_kept(self, tmp_path):
        good = instance_to_record(instance("py-name-error"))
        bad = dict(good, id="broken",
                   ground_truth_diff=("--- a/main.py\n+++ b/main.py\n"
                                      "@@ -1 +1 @@\n-no such line\n+whatever\n"))
        path = tmp_path / "mix.jsonl"
        path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n")
        load = load_benchmark(path)
        assert [i.id for i in load.instances] == ["py-name-error"]
        assert len(load.errors) == 1
        assert load.errors[0].record_id == "broken"

    def test_undecodable_line_collected(self, tmp_path):
        good = instance_to_record(instance("py-name-error"))
        path = tmp_path / "mix.jsonl"
        path.write_text("{not json\n" + json.dumps(good) + "\n")
        load = load_benchmark(path)
        assert len(load.instances) == 1
        assert load.errors[0].record_id == "line 1"

    def test_duplicate_id_rejected(self, tmp_path):
        record = json.dumps(instance_to_record(instance("py-name-error")))
        path = tmp_path / "dup.jsonl"
        path.write_text(record + "\n" + record + "\n")
        load = load_benchmark(path)
        assert len(load.instances) == 1
        assert "duplicate" in load.errors[0].reason

    def test_round_trip_every_instance(self):
        for inst in LOAD.instances:
            assert parse_instance(instance_to_record(inst)) == inst

    def test_unit_tests_parsed(self):
        spec = instance("py-type-concat").unit_tests
        assert isinstance(spec, UnitTestSpec)
        assert spec.command[0] == "python3"
        assert "test_main.py" in spec.files

    def test_too_many_urls_rejected(self):
        base = instance("py-name-error")
        with pytest.raises(ValueError):
            BenchmarkInstance(
                id="x", language=base.language,
                erroneous_code=base.erroneous_code,
                error_message=base.error_message,
                project_context=base.project_context,
                ground_truth_diff=base.ground_truth_diff,
                reference_explanation="r",
                verified_urls=("u1", "u2", "u3", "u4"))

    def test_dataset_hash_tracks_content(self):
        all_hash = dataset_hash(LOAD.instances)
        assert all_hash == dataset_hash(LOAD.instances)
        assert all_hash != dataset_hash(LOAD.instances[:19])


class TestSandbox:
    def test_ground_truth_compiles_c(self):
        inst = instance("c-missing-semicolon")
        check = compiles_correctly(inst, oracle_solution(inst))
        assert check.compiled is True
        assert check.semantically_correct is True  # ships a ./prog test

    def test_identity_diff_does_not_compile(self):
        inst = instance("c-missing-semicolon")
        check = compiles_correctly(inst, solution_with(UnifiedDiff()))
        assert check.compiled is False
        assert check.semantically_correct is None

    def test_python_runs_after_fix(self):
        inst = instance("py-name-error")
        assert compiles_correctly(inst, oracle_solution(inst)).compiled is True
        assert compiles_correctly(inst, solution_with(UnifiedDiff())).compiled is False

    def test_unit_tests_assess_semantics(self):
        inst = instance("py-type-concat")
        check = compiles_correctly(inst, oracle_solution(inst))
        assert check.compiled is True
        assert check.semantically_correct is True

    def test_no_unit_tests_means_unassessed(self):
        inst = instance("py-name-error")
        check = compiles_correctly(inst, oracle_solution(inst))
        assert check.semantically_correct is None

    def test_mispatching_fix_is_negative_not_error(self):
        inst = instance("py-name-error")
        wrong = parse_unified_diff(
            "--- a/main.py\n+++ b/main.py\n@@ -1 +1 @@\n-no such line\n+x\n")
        check = compiles_correctly(inst, solution_with(wrong))
        assert check.compiled is False
        assert "apply" in check.detail

    def test_missing_toolchain_raises_sandbox_failure(self):
        inst = instance("c-missing-semicolon")
        spec = SandboxSpec(commands={LanguageId.C: ("warp-no-such-tool", "{src}")})
        with pytest.raises(SandboxFailure):
            compiles_correctly(inst, oracle_solution(inst), spec)

    @pytest.mark.skipif(shutil.which("go") is not None,
                        reason="Go toolchain present")
    def test_go_without_toolchain_raises_sandbox_failure(self):
        inst = instance("go-undefined-println")
        with pytest.raises(SandboxFailure):
            compiles_correctly(inst, oracle_solution(inst))

    def test_wall_clock_limit_bounds_runaway_code(self):
        before = "raise SystemExit(1)\n"
        after = "while True:\n    pass\n"
        inst = BenchmarkInstance(
            id="spin", language=LanguageId.PYTHON,
            erroneous_code=before,
            error_message="SystemExit: 1",
            project_context=instance("py-name-error").project_context,
            ground_truth_diff=render_diff(before, after, "main.py"),
            reference_explanation="r")
        check = compiles_correctly(inst, oracle_solution(inst),
                                   SandboxSpec(wall_clock_limit_s=0.5))
        assert check.compiled is False
        assert "limit" in check.detail


class TestAdapters:
    def test_oracle_returns_ground_truth(self):
        inst = instance("c-missing-semicolon")
        result = OracleAdapter().repair(inst)
        assert result.solutions[0].fix == inst.ground_truth_diff
        assert result.solutions[0].confidence == 1.0
        assert result.evidence_ranking == inst.verified_urls
        assert result.latency_ms == 0

    def test_null_returns_identity_diff(self):
        result = NullAdapter().repair(instance("py-name-error"))
        assert result.solutions[0].fix.is_identity
        assert result.evidence_ranking == ()

    def test_negative_latency_rejected(self):
        with pytest.raises(ValueError):
            RepairResult(solutions=(), evidence_ranking=(), latency_ms=-1)


SUBSET = [BY_ID[i] for i in ("c-missing-semicolon", "py-name-error",
                             "py-type-concat", "go-undefined-println")]


class TestRunEvaluation:
    def report(self, instances=SUBSET):
        return run_evaluation([OracleAdapter(), NullAdapter()], instances)

    def test_oracle_and_null_bounds(self):
        report = self.report()
        oracle, null = report.rows
        assert oracle.system == "oracle" and null.system == "null"
        assert oracle.exact_match_pct == 100.0
        assert oracle.bleu4 == pytest.approx(1.0)
        assert oracle.rouge_l == pytest.approx(1.0)
        assert oracle.ndcg_at_3 == pytest.approx(1.0)
        assert oracle.mrr == pytest.approx(1.0)
        assert null.exact_match_pct == 0.0
        assert null.ndcg_at_3 == 0.0
        assert null.mrr == 0.0
        assert null.compiles_correctly_pct == 0.0

    def test_sandbox_failure_counts_not_propagated(self):
        report = self.report()
        oracle = report.rows[0]
        # The Go instance has no local toolchain; its compile cell is
        # unassessed rather than fatal.
        assert oracle.sandbox_failures == 1
        assert oracle.compiles_assessed == 3
        assert oracle.compiles_correctly_pct == 100.0

    def test_semantics_only_where_tested(self):
        oracle = self.report().rows[0]
        assert oracle.semantic_assessed == 2  # c-missing-semicolon, py-type-concat
        assert oracle.semantic_correctness_pct == 100.0

    def test_report_is_byte_identical(self):
        first = self.report().to_json()
        second = self.report().to_json()
        assert first == second

    def test_parallel_rows_match_serial(self):
        serial = run_evaluation([OracleAdapter()], SUBSET, parallelism=1)
        parallel = run_evaluation([OracleAdapter()], SUBSET, parallelism=4)
        assert serial.rows == parallel.rows

    def test_requires_adapters_and_instances(self):
        with pytest.raises(ValueError):
            run_evaluation([], SUBSET)
        with pytest.raises(ValueError):
            run_evaluation([OracleAdapter()], [])

    def test_table_rendering(self):
        report = self.report()
        table = render_report_table(report)
        lines = table.splitlines()
        assert lines[0].split() == ["System", "EM%", "CC%", "SC%", "BLEU-4",
                                    "ROUGE-L", "NDCG@3", "MRR", "Latency(s)"]
        assert any(line.startswith("oracle") for line in lines)
        assert any(line.startswith("null") for line in lines)
        assert "unassessed" in table  # null row has no semantic verdicts
        assert f"dataset {report.dataset_hash}" in table
