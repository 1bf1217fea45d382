"""Benchmark dataset: instance type, JSONL loading, validation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from ..context import BuildTool, Dependency, ProjectMetadata
from ..diagnostics import LanguageId
from ..diffs import UnifiedDiff, apply_diff, format_diff, parse_unified_diff
from ..errors import ContextMismatch, DatasetUnreadable, DiffError, ValidationError

MAX_VERIFIED_URLS = 3


@dataclass(frozen=True)
class UnitTestSpec:
    """How to assess semantic correctness: extra files written to the
    scratch dir, then a command whose exit status is the verdict."""
    command: tuple[str, ...]
    files: Mapping[str, str] = field(default_factory=dict)
    timeout_s: Optional[float] = None

    def __post_init__(self):
        if not self.command:
            raise ValueError("test command must be non-empty")


@dataclass(frozen=True)
class BenchmarkInstance:
    id: str
    language: LanguageId
    erroneous_code: str
    error_message: str
    project_context: ProjectMetadata
    ground_truth_diff: UnifiedDiff
    reference_explanation: str
    verified_urls: tuple[str, ...] = ()
    unit_tests: Optional[UnitTestSpec] = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("instance id must be non-empty")
        if not self.erroneous_code:
            raise ValueError("erroneous_code must be non-empty")
        if not self.error_message:
            raise ValueError("error_message must be non-empty")
        if len(self.verified_urls) > MAX_VERIFIED_URLS:
            raise ValueError(f"at most {MAX_VERIFIED_URLS} verified urls")
        # The ground truth must patch the broken code without fuzz.
        apply_diff(self.erroneous_code, self.ground_truth_diff)

    @property
    def fixed_code(self) -> str:
        return apply_diff(self.erroneous_code, self.ground_truth_diff)


@dataclass(frozen=True)
class BenchmarkLoad:
    """Valid instances plus the per-record failures; a bad record never
    aborts the rest of the file."""
    instances: tuple[BenchmarkInstance, ...]
    errors: tuple[ValidationError, ...]


def _parse_metadata(payload: Mapping) -> ProjectMetadata:
    deps = tuple(Dependency(name=d["name"], version_spec=d.get("version_spec", ""))
                 for d in payload.get("dependencies", ()))
    return ProjectMetadata(
        dependencies=deps,
        compiler_flags=tuple(payload.get("compiler_flags", ())),
        build_tool=BuildTool(payload.get("build_tool", "None")),
        language_version=payload.get("language_version"),
    )


def _parse_unit_tests(payload: Optional[Mapping]) -> Optional[UnitTestSpec]:
    if payload is None:
        return None
    return UnitTestSpec(
        command=tuple(payload["command"]),
        files=dict(payload.get("files", {})),
        timeout_s=payload.get("timeout_s"),
    )


def parse_instance(payload: Mapping) -> BenchmarkInstance:
    """Build one instance from a decoded record, revalidating every
    invariant (including clean ground-truth application)."""
    return BenchmarkInstance(
        id=payload["id"],
        language=LanguageId(payload["language"]),
        erroneous_code=payload["erroneous_code"],
        error_message=payload["error_message"],
        project_context=_parse_metadata(payload.get("project_context", {})),
        ground_truth_diff=parse_unified_diff(payload["ground_truth_diff"]),
        reference_explanation=payload["reference_explanation"],
        verified_urls=tuple(payload.get("verified_urls", ())),
        unit_tests=_parse_unit_tests(payload.get("unit_tests")),
    )


def instance_to_record(instance: BenchmarkInstance) -> dict:
    """Inverse of parse_instance, used by fixture generators."""
    record: dict = {
        "id": instance.id,
        "language": instance.language.value,
        "erroneous_code": instance.erroneous_code,
        "error_message": instance.error_message,
        "ground_truth_diff": format_diff(instance.ground_truth_diff),
        "reference_explanation": instance.reference_explanation,
        "verified_urls": list(instance.verified_urls),
    }
    meta = instance.project_context
    if not meta.is_empty:
        context: dict = {}
        if meta.dependencies:
            context["dependencies"] = [
                {"name": d.name, "version_spec": d.version_spec}
                for d in meta.dependencies]
        if meta.compiler_flags:
            context["compiler_flags"] = list(meta.compiler_flags)
        if meta.build_tool is not BuildTool.NONE:
            context["build_tool"] = meta.build_tool.value
        if meta.language_version:
            context["language_version"] = meta.language_version
        record["project_context"] = context
    if instance.unit_tests:
        tests: dict = {"command": list(instance.unit_tests.command)}
        if instance.unit_tests.files:
            tests["files"] = dict(instance.unit_tests.files)
        if instance.unit_tests.timeout_s is not None:
            tests["timeout_s"] = instance.unit_tests.timeout_s
        record["unit_tests"] = tests
    return record


def load_benchmark(path: str | Path) -> BenchmarkLoad:
    """Parse a line-delimited benchmark file.  Each line is one record;
    lines that fail to decode or validate are collected as
    ValidationError entries and skipped."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetUnreadable(f"cannot read {path}: {exc}") from exc

    instances: list[BenchmarkInstance] = []
    errors: list[ValidationError] = []
    seen_ids: set[str] = set()
    for line_number, line in enumerate(raw.split("\n"), start=1):
        if not line.strip():
            continue
        record_id = f"line {line_number}"
        try:
            payload = json.loads(line)
            record_id = payload.get("id", record_id) if isinstance(payload, dict) \
                else record_id
            instance = parse_instance(payload)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError,
                DiffError, ContextMismatch) as exc:
            errors.append(ValidationError(record_id, str(exc)))
            continue
        if instance.id in seen_ids:
            errors.append(ValidationError(instance.id, "duplicate instance id"))
            continue
        seen_ids.add(instance.id)
        instances.append(instance)
    return BenchmarkLoad(instances=tuple(instances), errors=tuple(errors))


def dataset_hash(instances: tuple[BenchmarkInstance, ...]) -> str:
    """Content hash over the canonical record serialization, stable
    across reformatting of the source file."""
    canonical = json.dumps([instance_to_record(i) for i in instances],
                           sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
