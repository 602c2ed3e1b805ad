"""Command-line entry point: ``htam plan|eval|bench gen|score|report``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import assets
from .benchgen import BenchConfig, build_benchmark, dump_tasks
from .centrality import build_cost_model, compute_centrality
from .config import BackendSettings, RunConfig
from .errors import ConfigError, HtamError, IoFailure
from .graph import DependencyGraph, ToolCatalog, aggregate_paths
from .harness import has_partial_failures, make_backend, make_embedder, run_evaluation
from .metrics import Judge, extract_key_sets, lexical_similarity, path_similarity, score_correctness
from .planner import DebateSchedule, Registry, plan_cot, plan_debate, plan_htam, plan_plan_execute, plan_react
from .report import GROUPINGS, EvalReport, emit_report, render_markdown, summarize

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 2, 3


def _backend(args) -> object:
    return make_backend(BackendSettings(kind=args.backend, cache_path=getattr(args, "cache", "") or ""))


def _catalog(path: str | None) -> ToolCatalog:
    return ToolCatalog.load(path) if path else ToolCatalog.bundled()


def cmd_plan(args) -> int:
    catalog = _catalog(args.catalog)
    backend = _backend(args)
    if args.arch == "htam":
        registry = Registry.load(args.registry, catalog) if args.registry else Registry.bundled(catalog)
        plan = plan_htam(args.query, registry, backend)
    elif args.arch == "cot":
        plan = plan_cot(args.query, catalog, backend)
    elif args.arch == "react":
        plan = plan_react(args.query, catalog, backend, args.max_steps)
    elif args.arch == "plan_execute":
        plan = plan_plan_execute(args.query, catalog, backend)
    else:
        plan = plan_debate(args.query, catalog, backend, args.debaters, DebateSchedule(free=args.free_rounds))
    if args.json:
        print(json.dumps(plan.to_dict(with_trace=args.trace), indent=2))
    else:
        print("\n".join(plan.tools))
    return EXIT_OK


def cmd_eval(args) -> int:
    config = RunConfig.load(args.config)
    report = run_evaluation(config)
    out = Path(args.out)
    for fmt in args.formats.split(","):
        fmt = fmt.strip()
        target = {"json": out / "report.json", "markdown": out / "summary.md", "csv": out / "csv"}.get(fmt)
        if target is None:
            raise ConfigError(f"unknown format {fmt!r}")
        emit_report(report, fmt, target)
    print(render_markdown(report))
    return EXIT_PARTIAL if has_partial_failures(report) else EXIT_OK


def cmd_bench_gen(args) -> int:
    known = assets.domains()
    domains = args.domains or known
    unknown = [d for d in domains if d not in known]
    if unknown:
        raise ConfigError(f"unknown domains {unknown}")
    config = BenchConfig(
        domains=domains,
        complexities=args.complexities or ["Simple", "Medium", "Complex"],
        quota=args.quota,
        dedup_threshold=args.threshold,
        seed=args.seed,
    )
    tasks, report = build_benchmark(config, _backend(args), make_embedder(args.embedder), _catalog(args.catalog))
    try:
        dump_tasks(tasks, args.out)
        if args.report:
            Path(args.report).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    print(json.dumps(report.counts()))
    return EXIT_PARTIAL if report.generation_failures else EXIT_OK


def _read_tools(path: str) -> list[str]:
    text = Path(path).read_text(encoding="utf-8").strip()
    if text.startswith("["):
        return [str(t) for t in json.loads(text)]
    return [line.strip() for line in text.splitlines() if line.strip()]


def cmd_score(args) -> int:
    agent, gt = _read_tools(args.agent), _read_tools(args.gt)
    graph = DependencyGraph.load(args.graph) if args.graph else aggregate_paths([gt])
    cost_model = build_cost_model(compute_centrality(graph), args.base_cost, args.alpha, args.uniform)
    judge = Judge(_backend(args), name="mock" if args.backend == "heuristic" else args.backend)

    class _Task:
        task_id, question, ground_truth = "cli", args.question, gt

    keys = extract_key_sets(judge, _Task, agent)
    scores = score_correctness(keys.key_gt or set(gt), keys.key_agent, agent, gt)
    record = {
        "task_id": "cli",
        "architecture": "external",
        "recall_key": scores.recall,
        "precision_key": scores.precision,
        "f1_key": scores.f1,
        "path_similarity": path_similarity(agent, gt, cost_model, lexical_similarity),
        "flags": list(keys.flags + scores.flags),
    }
    print(json.dumps(record, indent=2))
    return EXIT_OK


def cmd_report(args) -> int:
    report = EvalReport.load(args.report)
    if args.format == "markdown":
        text = render_markdown(report)
    elif args.format == "json":
        text = json.dumps(summarize(report, args.group_by), indent=2)
    else:
        if not args.out:
            raise ConfigError("csv output needs --out DIR")
        emit_report(report, "csv", args.out)
        return EXIT_OK
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htam", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def backend_opts(p):
        p.add_argument("--backend", choices=["heuristic", "http"], default="heuristic")
        p.add_argument("--cache", help="JSONL response cache")
        p.add_argument("--catalog", help="tool catalog JSON (bundled by default)")

    p = sub.add_parser("plan", help="plan one query and print the tool list")
    p.add_argument("query")
    p.add_argument("--arch", choices=["htam", "cot", "react", "plan_execute", "debate"], default="htam")
    p.add_argument("--registry")
    p.add_argument("--max-steps", type=int, default=10)
    p.add_argument("--debaters", type=int, default=3)
    p.add_argument("--free-rounds", type=int, default=2)
    p.add_argument("--json", action="store_true")
    p.add_argument("--trace", action="store_true", help="include raw exchanges in --json output")
    backend_opts(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("eval", help="full evaluation run from a config file")
    p.add_argument("config")
    p.add_argument("--out", default="results")
    p.add_argument("--formats", default="json,markdown,csv")
    p.set_defaults(func=cmd_eval)

    bench = sub.add_parser("bench", help="benchmark construction")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    p = bench_sub.add_parser("gen", help="run the task generation pipeline")
    p.add_argument("--out", required=True, help="output JSONL")
    p.add_argument("--report", help="pipeline report JSON")
    p.add_argument("--domains", nargs="*")
    p.add_argument("--complexities", nargs="*", choices=["Simple", "Medium", "Complex"])
    p.add_argument("--quota", type=int, default=1)
    p.add_argument("--threshold", type=float, default=0.90)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embedder", choices=["hashing", "http"], default="hashing")
    backend_opts(p)
    p.set_defaults(func=cmd_bench_gen)

    p = sub.add_parser("score", help="score one tool list against a ground-truth list")
    p.add_argument("agent", help="agent tool list (JSON array or one per line)")
    p.add_argument("gt", help="ground-truth tool list")
    p.add_argument("--question", default="")
    p.add_argument("--graph", help="dependency graph JSON for centrality costs")
    p.add_argument("--base-cost", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--uniform", action="store_true")
    backend_opts(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="re-summarize a saved report")
    p.add_argument("report")
    p.add_argument("--group-by", choices=GROUPINGS, default="overall")
    p.add_argument("--format", choices=["markdown", "json", "csv"], default="markdown")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HtamError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
