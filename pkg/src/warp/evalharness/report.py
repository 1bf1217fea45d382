"""Evaluation report: per-system metric rows, canonical serialization,
and an aligned text table."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Mapping, Optional


@dataclass(frozen=True)
class SystemRow:
    system: str
    instances: int
    exact_match_pct: float
    compiles_correctly_pct: Optional[float]
    semantic_correctness_pct: Optional[float]
    bleu4: float
    rouge_l: float
    ndcg_at_3: float
    mrr: float
    mean_latency_s: float
    compiles_assessed: int = 0
    semantic_assessed: int = 0
    sandbox_failures: int = 0

    def __post_init__(self):
        for name in ("exact_match_pct", "compiles_correctly_pct",
                     "semantic_correctness_pct"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 100.0:
                raise ValueError(f"{name}={value} outside [0,100]")
        for name in ("bleu4", "rouge_l", "ndcg_at_3", "mrr"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0,1]")


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[SystemRow, ...]
    dataset_hash: str
    config: Mapping[str, object]

    def __post_init__(self):
        identities = [r.system for r in self.rows]
        if len(identities) != len(set(identities)):
            raise ValueError("duplicate system identities in report")

    def to_json(self) -> str:
        """Canonical serialization; byte-identical for identical runs."""
        payload = {
            "rows": [asdict(r) for r in self.rows],
            "dataset_hash": self.dataset_hash,
            "config": dict(self.config),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


_COLUMNS = [
    ("System", "system", "{}"),
    ("EM%", "exact_match_pct", "{:.1f}"),
    ("CC%", "compiles_correctly_pct", "{:.1f}"),
    ("SC%", "semantic_correctness_pct", "{:.1f}"),
    ("BLEU-4", "bleu4", "{:.4f}"),
    ("ROUGE-L", "rouge_l", "{:.4f}"),
    ("NDCG@3", "ndcg_at_3", "{:.4f}"),
    ("MRR", "mrr", "{:.4f}"),
    ("Latency(s)", "mean_latency_s", "{:.3f}"),
]


def render_report_table(report: EvalReport) -> str:
    """Column-aligned comparison table, one row per system."""
    grid = [[title for title, _, _ in _COLUMNS]]
    for row in report.rows:
        cells = []
        for _, attr, fmt in _COLUMNS:
            value = getattr(row, attr)
            cells.append("unassessed" if value is None else fmt.format(value))
        grid.append(cells)
    widths = [max(len(line[i]) for line in grid) for i in range(len(_COLUMNS))]
    lines = []
    for line_index, cells in enumerate(grid):
        lines.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip())
        if line_index == 0:
            lines.append("  ".join("-" * w for w in widths))
    lines.append(f"dataset {report.dataset_hash}")
    return "\n".join(lines) + "\n"
