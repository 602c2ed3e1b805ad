"""End-to-end evaluation: plan every task with every architecture, score the
plans, run the completeness tournaments and assemble the report."""

from __future__ import annotations

import json
import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .backends import (
    CachedBackend,
    CompletionBackend,
    Decoding,
    HashingEmbedder,
    HeuristicBackend,
    HttpBackend,
    HttpEmbedder,
)
from .benchgen import TaskRecord, load_tasks
from .centrality import CostModel, build_cost_model, compute_centrality
from .config import PLANNERS, BackendSettings, RunConfig
from .errors import BackendError, ConfigError, HtamError, JudgeProtocolError
from .graph import DependencyGraph, ToolCatalog, aggregate_paths
from .metrics import (
    EmbeddingSimilarity,
    Judge,
    KeySets,
    apply_verdicts,
    battle_order,
    exact_similarity,
    extract_key_sets,
    lexical_similarity,
    path_similarity,
    score_correctness,
)
from .planner import (
    DebateSchedule,
    HtamSettings,
    Plan,
    Registry,
    plan_cot,
    plan_debate,
    plan_htam,
    plan_plan_execute,
    plan_react,
)
from .report import GROUPINGS, EvalReport, compute_aggregates, tool_usage_stats

log = logging.getLogger(__name__)


def make_backend(settings: BackendSettings) -> CompletionBackend:
    if settings.kind == "heuristic":
        backend: CompletionBackend = HeuristicBackend()
    elif settings.kind == "http":
        try:
            backend = HttpBackend.from_env(api_base=settings.api_base or None, model=settings.model or None, max_in_flight=settings.max_in_flight)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        raise ConfigError(f"unknown backend kind {settings.kind!r}")
    return CachedBackend(backend, settings.cache_path) if settings.cache_path else backend


def load_external_plans(path: str | Path) -> dict[str, list[str]]:
    """``{task_id: [tool, ...]}``, optionally wrapped as ``{"plans": {...}}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict) and isinstance(data.get("plans"), dict):
        data = data["plans"]
    if not isinstance(data, dict):
        raise ConfigError(f"external plans in {path} must map task ids to tool lists")
    return {str(k): [str(t) for t in v] for k, v in data.items()}


Planner = Callable[[str], Plan]


def _planners(config: RunConfig, catalog: ToolCatalog, registry: Registry | None, backend: CompletionBackend) -> dict[str, Planner]:
    decoding = Decoding(config.backend.temperature, config.backend.max_tokens, config.backend.model)
    p = config.planners
    htam_settings = HtamSettings({int(k): v for k, v in p.max_agents.items()}, decoding)
    return {
        "htam": lambda q: plan_htam(q, registry, backend, htam_settings),
        "cot": lambda q: plan_cot(q, catalog, backend, decoding),
        "react": lambda q: plan_react(q, catalog, backend, p.react_max_steps, decoding),
        "plan_execute": lambda q: plan_plan_execute(q, catalog, backend, decoding),
        "debate": lambda q: plan_debate(q, catalog, backend, p.debaters, DebateSchedule(free=p.free_rounds), decoding),
    }


def _safe_plan(planner: Planner, arch: str, query: str) -> Plan:
    try:
        return planner(query)
    except (HtamError, ValueError) as exc:
        log.warning("%s failed on %r: %s", arch, query[:60], exc)
        return Plan(architecture=arch, flags=[f"plan_failed:{type(exc).__name__}"])


def _similarity(config: RunConfig, catalog: ToolCatalog, embedder):
    kind = config.metrics.similarity
    if kind == "exact":
        return exact_similarity
    if kind == "lexical":
        return lexical_similarity
    return EmbeddingSimilarity(embedder or HashingEmbedder(), {t.name: t.description for t in catalog})


def _key_sets(judge: Judge, task: TaskRecord, tools: list[str]) -> KeySets:
    try:
        return extract_key_sets(judge, task, tools)
    except JudgeProtocolError as exc:
        log.warning("key extraction failed for %s: %s", task.task_id, exc)
        return KeySets(frozenset(task.ground_truth), frozenset(tools), judge.name, ("judge_error",))


def score_plan(task: TaskRecord, plan: Plan, judge: Judge, cost_model: CostModel, sim, label: str | None = None) -> dict:
    tools = plan.tools
    keys = _key_sets(judge, task, tools)
    key_gt = keys.key_gt or frozenset(task.ground_truth)
    scores = score_correctness(key_gt, keys.key_agent, tools, task.ground_truth)
    flags = list(plan.flags) + list(keys.flags) + list(scores.flags)
    if plan.quarantined:
        flags.append(f"quarantined:{len(plan.quarantined)}")
    if not tools:
        flags.append("empty_plan")
    return {
        "task_id": task.task_id,
        "architecture": label or plan.architecture,
        "complexity": task.complexity,
        "domain": task.domain,
        "recall_key": scores.recall,
        "precision_key": scores.precision,
        "f1_key": scores.f1,
        "path_similarity": path_similarity(tools, task.ground_truth, cost_model, sim),
        "steps": tools,
        "flags": sorted(set(flags), key=flags.index),
    }


def tournament_tables(
    verdict_rows: Sequence[tuple[str, str, str, str]],
    tasks: Sequence[TaskRecord],
    labels: Sequence[str],
    k: float,
    initial: float,
) -> dict:
    """Overall, per-complexity and per-domain Elo ratings replayed from one
    set of verdicts; the battle log is the overall tournament's."""
    by_id = {t.task_id: t for t in tasks}
    overall = apply_verdicts(labels, verdict_rows, k, initial)
    out = {
        "overall": overall.ratings,
        "battles": [b.to_dict() for b in overall.history],
        "skipped": [{"task_id": t, "a": a, "b": b, "verdict": v} for t, a, b, v in overall.skipped],
    }
    for attr in ("complexity", "domain"):
        groups: dict[str, list] = {}
        for row in verdict_rows:
            groups.setdefault(getattr(by_id[row[0]], attr), []).append(row)
        out[f"by_{attr}"] = {g: apply_verdicts(labels, rows, k, initial).ratings for g, rows in sorted(groups.items())}
    return out


def run_evaluation(
    config: RunConfig,
    backend: CompletionBackend | None = None,
    judge_backend: CompletionBackend | None = None,
    embedder=None,
) -> EvalReport:
    config.validate()
    started = datetime.now(timezone.utc).isoformat()
    tasks = load_tasks(config.tasks_path)
    catalog = ToolCatalog.load(config.catalog_path) if config.catalog_path else ToolCatalog.bundled()
    registry = None
    if "htam" in config.architectures:
        registry = Registry.load(config.registry_path, catalog) if config.registry_path else Registry.bundled(catalog)
    if config.graph_path:
        graph = DependencyGraph.load(config.graph_path)
    else:
        graph = aggregate_paths((t.ground_truth for t in tasks), description="aggregated from ground-truth paths")

    m = config.metrics
    scores = compute_centrality(graph, damping=m.damping)
    cost_model = build_cost_model(scores, m.base_cost, m.alpha, m.uniform_mode)
    sim = _similarity(config, catalog, embedder)
    backend = backend or make_backend(config.backend)
    judge_backend = judge_backend or (make_backend(config.judge) if config.judge else backend)
    judge_settings = config.judge or config.backend
    judge = Judge(
        judge_backend,
        Decoding(judge_settings.temperature, judge_settings.max_tokens, judge_settings.model),
        name="mock" if judge_settings.kind == "heuristic" else judge_settings.kind,
    )

    # plans[label][task_id]
    plans: dict[str, dict[str, Plan]] = {}
    planners = _planners(config, catalog, registry, backend)
    for arch in config.architectures:
        if arch in config.external_plans:
            external = load_external_plans(config.external_plans[arch])
            plans[arch] = {}
            for t in tasks:
                plan = Plan.from_tools(external.get(t.task_id, []), "external", catalog)
                if t.task_id not in external:
                    plan.flags.append("missing_external_plan")
                plans[arch][t.task_id] = plan
            continue
        planner = planners[arch]
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(pool.map(lambda t, p=planner, a=arch: _safe_plan(p, a, t.question), tasks))
        plans[arch] = {t.task_id: plan for t, plan in zip(tasks, results)}

    per_task = []
    for t in tasks:
        for arch in config.architectures:
            per_task.append(score_plan(t, plans[arch][t.task_id], judge, cost_model, sim, arch))

    # verdicts are fetched once per (task, pair) and replayed per grouping
    by_id = {t.task_id: t for t in tasks}
    order = battle_order([t.task_id for t in tasks], config.architectures, config.seed if m.shuffle_battles else None)
    verdict_rows = []
    for task_id, a, b in order:
        task = by_id[task_id]
        try:
            verdict = judge.verdict(task.question, a, plans[a][task_id].tools, b, plans[b][task_id].tools)
        except JudgeProtocolError as exc:
            verdict = f"<error: {exc}>"
        verdict_rows.append((task_id, a, b, verdict))
    elo = tournament_tables(verdict_rows, tasks, sorted(config.architectures), m.k_factor, m.initial_rating)

    usage = {arch: [r.to_dict() for r in tool_usage_stats(plans[arch][t.task_id].tools for t in tasks)] for arch in config.architectures}
    aggregates = {g: compute_aggregates(per_task, g) for g in GROUPINGS}
    provenance = {
        "config": config.to_dict(),
        "version": __version__,
        "graph": {"nodes": len(graph.nodes), "edges": len(graph.edges), "pagerank_iterations": scores.iterations_used, "pagerank_converged": scores.converged},
        "notes": ["overall rows are task-weighted means"],
        "started_at": started,
        "finished_at": datetime.now(timezone.utc).isoformat(),
    }
    return EvalReport(per_task, aggregates, elo, usage, provenance)


def has_partial_failures(report: EvalReport) -> bool:
    bad = ("plan_failed", "judge_error", "missing_external_plan")
    return bool(report.elo.get("skipped")) or any(f.startswith(bad) for r in report.per_task for f in r["flags"])


def make_embedder(kind: str):
    if kind == "http":
        return HttpEmbedder.from_env()
    if kind in ("hashing", "lexical"):
        return HashingEmbedder()
    raise ConfigError(f"unknown embedder {kind!r}")


__all__ = [
    "PLANNERS",
    "has_partial_failures",
    "load_external_plans",
    "make_backend",
    "make_embedder",
    "run_evaluation",
    "score_plan",
    "tournament_tables",
]
