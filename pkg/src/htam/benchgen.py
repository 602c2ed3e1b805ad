"""Benchmark construction: dependency template, path extraction,
parameterization, question formulation from the finished path, and three
validation filters (complexity, domain relevance, semantic dedup)."""

from __future__ import annotations

import json
import logging
import random
import re
import uuid
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import assets
from .backends import CompletionBackend, Decoding, ask
from .backends.embedding import EmbeddingProvider
from .errors import (
    BackendError,
    BenchgenError,
    EmptyQuestion,
    InvalidTemplate,
    NoListFound,
    ParameterizationMismatch,
)
from .graph import DependencyGraph, ToolCatalog, enumerate_paths, validate_dag
from .parsing import extract_json

log = logging.getLogger(__name__)

COMPLEXITIES = ("Simple", "Medium", "Complex")
DEFAULT_BANDS = {"Simple": (3, 6), "Medium": (6, 10), "Complex": (10, 16)}
# how many tools the template prompt asks for, per complexity
DEFAULT_TOOL_RANGES = {"Simple": "6-10", "Medium": "10-15", "Complex": "15-20"}
STAGES = ("complexity", "relevance", "dedup")
TASK_FIELDS = ("task_id", "question", "domain", "complexity", "ground_truth", "parameterized", "key_steps")


@dataclass
class TaskRecord:
    task_id: str
    question: str
    domain: str
    complexity: str
    ground_truth: list[str]
    parameterized: list[dict] = field(default_factory=list)
    key_steps: list[str] | None = None

    def problems(self, domains: Iterable[str] | None = None) -> list[str]:
        out = []
        if not self.ground_truth:
            out.append("empty ground_truth")
        if self.complexity not in COMPLEXITIES:
            out.append(f"unknown complexity {self.complexity!r}")
        if domains is not None and self.domain not in set(domains):
            out.append(f"unknown domain {self.domain!r}")
        if not self.question.strip():
            out.append("empty question")
        return out

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "question": self.question,
            "domain": self.domain,
            "complexity": self.complexity,
            "ground_truth": list(self.ground_truth),
            "parameterized": [dict(p) for p in self.parameterized],
            "key_steps": None if self.key_steps is None else list(self.key_steps),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> TaskRecord:
        return cls(
            task_id=str(data["task_id"]),
            question=data["question"],
            domain=data["domain"],
            complexity=data["complexity"],
            ground_truth=list(data["ground_truth"]),
            parameterized=list(data.get("parameterized") or []),
            key_steps=None if data.get("key_steps") is None else list(data["key_steps"]),
        )


def load_tasks(path: str | Path) -> list[TaskRecord]:
    """Read a JSONL benchmark file (a JSON array is accepted too)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("["):
        return [TaskRecord.from_dict(d) for d in json.loads(text)]
    return [TaskRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def dump_tasks(tasks: Iterable[TaskRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for task in tasks:
            fh.write(json.dumps(task.to_dict(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class DomainKeywordTable:
    keywords: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        for domain, words in self.keywords.items():
            if not words:
                raise ValueError(f"no keywords for {domain}")
            if any(w != w.lower() for w in words):
                raise ValueError(f"keywords for {domain} must be lower-case")

    @classmethod
    def bundled(cls) -> DomainKeywordTable:
        return cls({d: tuple(ws) for d, ws in assets.domain_keywords().items()})

    def __getitem__(self, domain: str) -> tuple[str, ...]:
        return tuple(self.keywords[domain])


@dataclass(frozen=True)
class ValidationOutcome:
    stage: str
    passed: bool
    detail: str = ""


# --- generation ------------------------------------------------------------


def _parse_template(text: str, domain: str, catalog: ToolCatalog) -> DependencyGraph:
    try:
        data = extract_json(text)
    except NoListFound as exc:
        raise InvalidTemplate("template output holds no JSON") from exc
    if not isinstance(data, dict) or not isinstance(data.get("nodes"), list) or not isinstance(data.get("edges"), list):
        raise InvalidTemplate("template JSON lacks nodes/edges")
    try:
        graph = DependencyGraph.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise InvalidTemplate(f"malformed edges: {exc}") from exc
    unknown = [n for n in graph.nodes if n not in catalog]
    if unknown:
        log.warning("template for %s names unknown tools %s; dropping them", domain, unknown)
        keep = [n for n in graph.nodes if n in catalog]
        graph = DependencyGraph(keep, [e for e in graph.edges if e[0] in catalog and e[1] in catalog], graph.domain, graph.description)
    if not graph.nodes:
        raise InvalidTemplate("template has no catalog tools")
    report = validate_dag(graph)
    if not report.ok:
        raise InvalidTemplate("; ".join(report.messages()))
    return graph


def generate_dependency_template(
    domain: str,
    complexity: str,
    catalog: ToolCatalog,
    backend: CompletionBackend,
    tools_number_range: str | None = None,
    decoding: Decoding | None = None,
) -> DependencyGraph:
    """Ask for a DAG template; an invalid answer is re-asked once."""
    if not len(catalog):
        raise InvalidTemplate("catalog is empty")
    prompt = assets.render(
        "dag_template",
        domain=domain,
        domain_desc=assets.domain_descriptions().get(domain, domain),
        tools_str=catalog.describe(),
        tools_number_range=tools_number_range or DEFAULT_TOOL_RANGES.get(complexity, "6-10"),
    )
    error: InvalidTemplate | None = None
    for _ in range(2):
        try:
            return _parse_template(ask(backend, prompt, decoding), domain, catalog)
        except InvalidTemplate as exc:
            error = exc
    raise InvalidTemplate(f"template rejected after retry: {error}")


@dataclass(frozen=True)
class ParameterizedPath:
    steps: list[dict]
    dropped: list[str] = field(default_factory=list)


def parameterize_path(path: Sequence[str], catalog: ToolCatalog, backend: CompletionBackend, decoding: Decoding | None = None) -> ParameterizedPath:
    prompt = assets.render("parameterize_flow", tools=json.dumps(list(path)), tools_str=catalog.describe(path))
    try:
        data = extract_json(ask(backend, prompt, decoding))
    except NoListFound as exc:
        raise ParameterizationMismatch("no JSON in parameterization output") from exc
    items = data.get("parameterized_tools") if isinstance(data, dict) else data
    if not isinstance(items, list):
        raise ParameterizationMismatch("output lacks parameterized_tools")
    got = [str(i.get("tool", "")).strip() if isinstance(i, dict) else "" for i in items]
    if got != list(path):
        raise ParameterizationMismatch(f"expected {list(path)}, got {got}")
    steps, dropped = [], []
    for tool, item in zip(path, items):
        spec = catalog.get(tool)
        allowed = set(spec.param_names) if spec else set()
        params = item.get("params") or item.get("parameters") or {}
        if not isinstance(params, dict):
            params = {}
        kept = {k: v for k, v in params.items() if k in allowed}
        for k in params:
            if k not in allowed:
                dropped.append(f"{tool}.{k}")
        steps.append({"tool": tool, "params": kept})
    if dropped:
        log.warning("dropped undeclared params %s", dropped)
    return ParameterizedPath(steps, dropped)


_SENTENCE_END = re.compile(r"(?<=[.?!])\s+|(?<=[.?!][\"'”])\s+")


def normalize_question(raw: str) -> tuple[str, bool]:
    """First sentence of the first non-empty paragraph, stripped of quotes
    and markup.  The flag is set when anything beyond it was discarded."""
    text = (raw or "").strip()
    text = re.sub(r"^(?:question|task)\s*:\s*", "", text, flags=re.IGNORECASE)
    paragraphs = [p.strip() for p in re.split(r"\n\s*\n|\n", text) if p.strip()]
    if not paragraphs:
        return "", False
    first = paragraphs[0]
    sentences = _SENTENCE_END.split(first)
    question = sentences[0].strip().strip("*_`\"'“”").strip()
    truncated = len(paragraphs) > 1 or len(sentences) > 1
    return question, truncated


def formulate_question(parameterized: ParameterizedPath | Sequence[dict], backend: CompletionBackend, decoding: Decoding | None = None, flags: list[str] | None = None) -> str:
    steps = parameterized.steps if isinstance(parameterized, ParameterizedPath) else list(parameterized)
    flow = "\n".join(f"{i + 1}. {s['tool']}({json.dumps(s.get('params', {}), sort_keys=True)})" for i, s in enumerate(steps))
    question, truncated = normalize_question(ask(backend, assets.render("generate_task", flow_str=flow), decoding))
    if not question:
        raise EmptyQuestion("backend returned no question")
    if truncated and flags is not None:
        flags.append("question_truncated")
    return question


# --- validation ------------------------------------------------------------


def verify_complexity(task: TaskRecord, ranges: Mapping[str, tuple[int, int]] = DEFAULT_BANDS) -> ValidationOutcome:
    lo, hi = ranges[task.complexity]
    n = len(task.ground_truth)
    ok = lo <= n <= hi
    return ValidationOutcome("complexity", ok, f"length {n} {'within' if ok else 'outside'} {task.complexity} band {lo}-{hi}")


def check_domain_relevance(
    task: TaskRecord,
    keyword_table: DomainKeywordTable,
    min_hits: int = 1,
    classifier: Callable[[TaskRecord], bool] | None = None,
) -> ValidationOutcome:
    text = task.question.lower()
    hits = [k for k in keyword_table[task.domain] if k in text]
    if len(hits) < min_hits:
        return ValidationOutcome("relevance", False, f"{len(hits)} keyword hits, need {min_hits}")
    if classifier is not None and not classifier(task):
        return ValidationOutcome("relevance", False, "rejected by classifier")
    return ValidationOutcome("relevance", True, f"hits: {', '.join(hits)}")


@dataclass(frozen=True)
class DedupResult:
    retained: list[TaskRecord]
    removed: list[tuple[str, str, float]]  # (removed id, kept id it duplicates, cosine)


def deduplicate(tasks: Sequence[TaskRecord], embedding_provider: EmbeddingProvider, threshold: float = 0.90) -> DedupResult:
    """Greedy scan in input order; a task is dropped when its cosine
    similarity to an already retained task exceeds ``threshold`` (or is an
    exact duplicate vector, so a threshold of 1.0 still removes those)."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    if not tasks:
        return DedupResult([], [])
    vectors = np.asarray(embedding_provider.embed([t.question for t in tasks]), dtype=float)
    kept_idx: list[int] = []
    removed = []
    for i, task in enumerate(tasks):
        if kept_idx:
            sims = vectors[kept_idx] @ vectors[i]
            j = int(np.argmax(sims))
            best = float(sims[j])
            if best > threshold or best >= 1.0 - 1e-9:
                removed.append((task.task_id, tasks[kept_idx[j]].task_id, best))
                continue
        kept_idx.append(i)
    return DedupResult([tasks[i] for i in kept_idx], removed)


# --- pipeline --------------------------------------------------------------


@dataclass
class BenchConfig:
    domains: list[str] = field(default_factory=assets.domains)
    complexities: list[str] = field(default_factory=lambda: list(COMPLEXITIES))
    quota: int = 1  # tasks per (domain, complexity)
    bands: dict[str, tuple[int, int]] = field(default_factory=lambda: dict(DEFAULT_BANDS))
    tool_ranges: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_TOOL_RANGES))
    dedup_threshold: float = 0.90
    min_hits: int = 1
    seed: int = 0
    max_paths: int = 64
    max_len: int = 20
    decoding: Decoding = field(default_factory=Decoding)
    classifier: Callable[[TaskRecord], bool] | None = None


@dataclass
class PipelineReport:
    generated: int = 0
    removed_complexity: int = 0
    removed_relevance: int = 0
    removed_dedup: int = 0
    retained: int = 0
    generation_failures: int = 0
    rejections: list[dict] = field(default_factory=list)
    audit: list[dict] = field(default_factory=list)

    def counts(self) -> dict:
        return {
            "generated": self.generated,
            "removed_complexity": self.removed_complexity,
            "removed_relevance": self.removed_relevance,
            "removed_dedup": self.removed_dedup,
            "retained": self.retained,
        }

    def to_dict(self) -> dict:
        return {
            **self.counts(),
            "generation_failures": self.generation_failures,
            "rejections": list(self.rejections),
            "audit": list(self.audit),
        }


def _pick_paths(paths: list[list[str]], quota: int, rng: random.Random) -> list[list[str]]:
    order = list(range(len(paths)))
    rng.shuffle(order)
    return [paths[order[i % len(order)]] for i in range(quota)] if order else []


def _generate_unit(domain: str, complexity: str, config: BenchConfig, catalog: ToolCatalog, backend: CompletionBackend, report: PipelineReport) -> list[TaskRecord]:
    rng = random.Random(f"{config.seed}:{domain}:{complexity}")
    try:
        graph = generate_dependency_template(domain, complexity, catalog, backend, config.tool_ranges.get(complexity), config.decoding)
    except (BenchgenError, BackendError) as exc:
        report.generation_failures += 1
        report.audit.append({"domain": domain, "complexity": complexity, "stage": "template", "detail": str(exc)})
        return []
    tasks = []
    for path in _pick_paths(enumerate_paths(graph, config.max_paths, config.max_len), config.quota, rng):
        flags: list[str] = []
        try:
            params = parameterize_path(path, catalog, backend, config.decoding)
            question = formulate_question(params, backend, config.decoding, flags)
        except (BenchgenError, BackendError) as exc:
            report.generation_failures += 1
            report.audit.append({"domain": domain, "complexity": complexity, "stage": "generation", "detail": str(exc)})
            continue
        task_id = str(uuid.UUID(int=rng.getrandbits(128), version=4))
        if params.dropped:
            flags.append("params_dropped")
        if flags:
            report.audit.append({"task_id": task_id, "flags": flags})
        tasks.append(TaskRecord(task_id, question, domain, complexity, list(path), params.steps))
    return tasks


def validate_tasks(
    tasks: Sequence[TaskRecord],
    config: BenchConfig,
    keyword_table: DomainKeywordTable,
    embedder: EmbeddingProvider,
    report: PipelineReport,
) -> list[TaskRecord]:
    """Complexity, then relevance, then dedup; each rejected task records
    the first stage it failed."""
    survivors = []
    for task in tasks:
        outcome = verify_complexity(task, config.bands)
        if outcome.passed:
            outcome = check_domain_relevance(task, keyword_table, config.min_hits, config.classifier)
        if outcome.passed:
            survivors.append(task)
            continue
        if outcome.stage == "complexity":
            report.removed_complexity += 1
        else:
            report.removed_relevance += 1
        report.rejections.append({"task_id": task.task_id, "stage": outcome.stage, "detail": outcome.detail})
    dedup = deduplicate(survivors, embedder, config.dedup_threshold)
    for removed_id, kept_id, sim in dedup.removed:
        report.removed_dedup += 1
        report.rejections.append({"task_id": removed_id, "stage": "dedup", "detail": f"cosine {sim:.4f} to {kept_id}"})
    report.retained = len(dedup.retained)
    return dedup.retained


def build_benchmark(
    config: BenchConfig,
    backend: CompletionBackend,
    embedder: EmbeddingProvider,
    catalog: ToolCatalog | None = None,
    keyword_table: DomainKeywordTable | None = None,
) -> tuple[list[TaskRecord], PipelineReport]:
    catalog = catalog or ToolCatalog.bundled()
    keyword_table = keyword_table or DomainKeywordTable.bundled()
    report = PipelineReport()
    generated: list[TaskRecord] = []
    for domain in config.domains:
        for complexity in config.complexities:
            generated.extend(_generate_unit(domain, complexity, config, catalog, backend, report))
    report.generated = len(generated)
    return validate_tasks(generated, config, keyword_table, embedder, report), report
