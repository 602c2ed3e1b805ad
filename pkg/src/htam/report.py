"""Evaluation report: per-task rows, grouped summaries, Elo tables, tool usage."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InconsistentReport, IoFailure

METRIC_FIELDS = ("recall_key", "precision_key", "f1_key", "path_similarity")
COLUMNS = ("Recall_key", "Precision_key", "F1_key", "Structural", "Holistic")
GROUPINGS = ("overall", "complexity", "domain")
COMPLEXITY_ORDER = ("Simple", "Medium", "Complex")


@dataclass(frozen=True)
class UsageRow:
    tool: str
    frequency: int
    avg_position: float

    def to_dict(self) -> dict:
        return {"tool": self.tool, "frequency": self.frequency, "avg_position": self.avg_position}


def tool_usage_stats(plans: Iterable[Sequence[str]]) -> list[UsageRow]:
    """Frequency and mean standardized position (0 = first step, 1 = last)
    of every tool, most frequent first, ties by name."""
    positions: dict[str, list[float]] = defaultdict(list)
    for plan in plans:
        tools = list(getattr(plan, "tools", plan))
        n = len(tools)
        for i, tool in enumerate(tools):
            positions[tool].append(i / (n - 1) if n > 1 else 0.0)
    rows = [UsageRow(t, len(ps), math.fsum(ps) / len(ps)) for t, ps in positions.items()]
    return sorted(rows, key=lambda r: (-r.frequency, r.tool))


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _group_key(row: dict, group_by: str) -> str:
    return "Overall" if group_by == "overall" else row[group_by]


def _group_order(keys: Iterable[str], group_by: str) -> list[str]:
    keys = list(dict.fromkeys(keys))
    if group_by == "complexity":
        return [c for c in COMPLEXITY_ORDER if c in keys] + sorted(k for k in keys if k not in COMPLEXITY_ORDER)
    if group_by == "domain":
        return sorted(keys)
    return keys


def compute_aggregates(per_task: Sequence[dict], group_by: str) -> list[dict]:
    """Mean metric per (group, architecture); groups without rows are omitted."""
    if group_by not in GROUPINGS:
        raise ValueError(f"group_by must be one of {GROUPINGS}")
    buckets: dict[tuple[str, str], list[dict]] = defaultdict(list)
    arch_order: list[str] = []
    for row in per_task:
        buckets[(_group_key(row, group_by), row["architecture"])].append(row)
        if row["architecture"] not in arch_order:
            arch_order.append(row["architecture"])
    out = []
    for group in _group_order((g for g, _ in buckets), group_by):
        for arch in arch_order:
            rows = buckets.get((group, arch))
            if not rows:
                continue
            agg = {"group": group, "architecture": arch, "n_tasks": len(rows)}
            for f in METRIC_FIELDS:
                agg[f] = _mean([r[f] for r in rows])
            out.append(agg)
    return out


@dataclass
class EvalReport:
    per_task: list[dict]
    aggregates: dict[str, list[dict]]
    elo: dict
    usage: dict
    provenance: dict = field(default_factory=dict)

    def body(self) -> dict:
        """Everything except provenance; deterministic for a fixed config."""
        return {"per_task": self.per_task, "aggregates": self.aggregates, "elo": self.elo, "usage": self.usage}

    def to_dict(self) -> dict:
        return {**self.body(), "provenance": self.provenance}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def check_consistency(self, tol: float = 1e-12) -> None:
        for group_by, stored in self.aggregates.items():
            fresh = compute_aggregates(self.per_task, group_by)
            if len(fresh) != len(stored):
                raise InconsistentReport(f"{group_by}: {len(stored)} aggregate rows, expected {len(fresh)}")
            for a, b in zip(stored, fresh):
                if (a["group"], a["architecture"], a["n_tasks"]) != (b["group"], b["architecture"], b["n_tasks"]):
                    raise InconsistentReport(f"{group_by}: row mismatch {a} vs {b}")
                for f in METRIC_FIELDS:
                    if abs(a[f] - b[f]) > tol:
                        raise InconsistentReport(f"{group_by}/{a['group']}/{a['architecture']}: {f} {a[f]} != {b[f]}")

    @classmethod
    def from_dict(cls, data: dict) -> EvalReport:
        report = cls(data["per_task"], data["aggregates"], data["elo"], data["usage"], data.get("provenance", {}))
        report.check_consistency()
        return report

    @classmethod
    def load(cls, path: str | Path) -> EvalReport:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailure(f"cannot read report {path}: {exc}") from exc
        return cls.from_dict(data)

    @property
    def architectures(self) -> list[str]:
        return list(dict.fromkeys(r["architecture"] for r in self.per_task))


def _ratings_for(report: EvalReport, group_by: str, group: str) -> dict[str, float]:
    if group_by == "overall":
        return report.elo.get("overall", {})
    return report.elo.get(f"by_{group_by}", {}).get(group, {})


def summarize(report: EvalReport, group_by: str = "overall") -> list[dict]:
    """Rows in the column order Recall_key, Precision_key, F1_key,
    Structural, Holistic; Holistic is the Elo rating from the tournament run
    over that group's tasks."""
    rows = []
    for agg in compute_aggregates(report.per_task, group_by):
        ratings = _ratings_for(report, group_by, agg["group"])
        rows.append(
            {
                "group": agg["group"],
                "architecture": agg["architecture"],
                "n_tasks": agg["n_tasks"],
                "Recall_key": agg["recall_key"],
                "Precision_key": agg["precision_key"],
                "F1_key": agg["f1_key"],
                "Structural": agg["path_similarity"],
                "Holistic": ratings.get(agg["architecture"]),
            }
        )
    return rows


def render_markdown(report: EvalReport) -> str:
    header = "| Group | Architecture | " + " | ".join(COLUMNS) + " |"
    sep = "|" + "---|" * (len(COLUMNS) + 2)
    lines = ["# Evaluation summary", "", header, sep]
    rows = summarize(report, "complexity") + summarize(report, "overall")
    for row in rows:
        cells = [f"{row[c]:.4f}" if c != "Holistic" else ("" if row[c] is None else f"{row[c]:.2f}") for c in COLUMNS]
        lines.append(f"| {row['group']} | {row['architecture']} | " + " | ".join(cells) + " |")
    domain_rows = summarize(report, "domain")
    if domain_rows:
        lines += ["", "## By domain", "", header, sep]
        for row in domain_rows:
            cells = [f"{row[c]:.4f}" if c != "Holistic" else ("" if row[c] is None else f"{row[c]:.2f}") for c in COLUMNS]
            lines.append(f"| {row['group']} | {row['architecture']} | " + " | ".join(cells) + " |")
    lines += ["", "Overall rows are task-weighted means; Holistic is the Elo rating of each group's own tournament.", ""]
    return "\n".join(lines)


def position_matrix(report: EvalReport, value: str = "avg_position") -> tuple[list[str], list[str], list[list]]:
    """Tool x architecture table of a usage statistic (blank where unused)."""
    archs = list(report.usage)
    lookup = {(a, r["tool"]): r[value] for a in archs for r in report.usage[a]}
    tools = sorted({t for _, t in lookup})
    return tools, archs, [[lookup.get((a, t), "") for a in archs] for t in tools]


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_report(report: EvalReport, fmt: str, path: str | Path) -> list[Path]:
    """Write ``report`` as json (one file), markdown (one file) or csv (a
    directory of tables).  Returns the files written."""
    path = Path(path)
    try:
        if fmt == "json":
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(report.to_json() + "\n", encoding="utf-8")
            return [path]
        if fmt == "markdown":
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(render_markdown(report), encoding="utf-8")
            return [path]
        if fmt == "csv":
            path.mkdir(parents=True, exist_ok=True)
            written = []
            per_task = path / "per_task.csv"
            header = ["task_id", "architecture", "complexity", "domain", *METRIC_FIELDS, "flags"]
            _write_csv(per_task, header, ([r[h] if h != "flags" else ";".join(r["flags"]) for h in header] for r in report.per_task))
            written.append(per_task)
            for group_by in GROUPINGS:
                out = path / f"summary_{group_by}.csv"
                _write_csv(out, ["group", "architecture", "n_tasks", *COLUMNS], ([r["group"], r["architecture"], r["n_tasks"], *(r[c] for c in COLUMNS)] for r in summarize(report, group_by)))
                written.append(out)
            usage = path / "usage.csv"
            _write_csv(usage, ["architecture", "tool", "frequency", "avg_position"], ([a, r["tool"], r["frequency"], r["avg_position"]] for a, rows in report.usage.items() for r in rows))
            written.append(usage)
            for value, name in (("avg_position", "position_matrix.csv"), ("frequency", "frequency_matrix.csv")):
                tools, archs, matrix = position_matrix(report, value)
                out = path / name
                _write_csv(out, ["tool", *archs], ([t, *row] for t, row in zip(tools, matrix)))
                written.append(out)
            return written
    except OSError as exc:
        raise IoFailure(f"cannot write {fmt} report to {path}: {exc}") from exc
    raise ValueError(f"unknown report format {fmt!r}")
