"""Centrality scores over the tool graph and the edit-cost table built on them."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import NegativeBase
from .graph import DependencyGraph

DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


def out_degree_centrality(graph: DependencyGraph) -> dict[str, float]:
    """Out-degree divided by the largest out-degree in the graph."""
    degrees = {n: graph.out_degree(n) for n in graph.nodes}
    top = max(degrees.values(), default=0)
    if top == 0:
        return {n: 0.0 for n in graph.nodes}
    return {n: d / top for n, d in degrees.items()}


@dataclass(frozen=True)
class PageRankResult:
    scores: dict[str, float]
    iterations: int
    converged: bool


def pagerank(
    graph: DependencyGraph,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    edge_weights: Mapping[tuple[str, str], float] | None = None,
) -> PageRankResult:
    """Power-iteration PageRank following edge direction.

    Mass of dangling nodes (no out-edges) is spread uniformly over all nodes.
    Iteration stops once the L1 change drops below ``tol``.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must lie in (0, 1), got {damping}")
    nodes = list(graph.nodes)
    n = len(nodes)
    if n == 0:
        return PageRankResult({}, 0, True)

    out_w: dict[str, list[tuple[str, float]]] = {}
    for u in nodes:
        targets = graph.successors[u]
        if edge_weights is None:
            weights = [1.0] * len(targets)
        else:
            weights = [float(edge_weights.get((u, v), 1.0)) for v in targets]
        total = sum(weights)
        out_w[u] = [(v, w / total) for v, w in zip(targets, weights)] if total > 0 else []

    rank = {v: 1.0 / n for v in nodes}
    teleport = (1.0 - damping) / n
    for it in range(1, max_iter + 1):
        dangling = sum(rank[u] for u in nodes if not out_w[u])
        base = teleport + damping * dangling / n
        new = {v: base for v in nodes}
        for u in nodes:
            share = damping * rank[u]
            for v, w in out_w[u]:
                new[v] += share * w
        total = sum(new.values())
        new = {v: r / total for v, r in new.items()}
        delta = sum(abs(new[v] - rank[v]) for v in nodes)
        rank = new
        if delta < tol:
            return PageRankResult(rank, it, True)
    return PageRankResult(rank, max_iter, False)


def pagerank_centrality(
    graph: DependencyGraph,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> dict[str, float]:
    return pagerank(graph, damping, tol, max_iter).scores


@dataclass(frozen=True)
class CentralityScores:
    odc: dict[str, float]
    prc: dict[str, float]
    damping: float = DEFAULT_DAMPING
    iterations_used: int = 0
    converged: bool = True


def compute_centrality(
    graph: DependencyGraph,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    edge_weights: Mapping[tuple[str, str], float] | None = None,
) -> CentralityScores:
    pr = pagerank(graph, damping, tol, max_iter, edge_weights)
    return CentralityScores(out_degree_centrality(graph), pr.scores, damping, pr.iterations, pr.converged)


@dataclass(frozen=True)
class CostModel:
    """Per-tool insertion/deletion costs.  Tools absent from the table cost
    ``base_cost``."""

    base_cost: float = 1.0
    alpha: float = 1.0
    uniform_mode: bool = False
    ins_del_cost: dict[str, float] = field(default_factory=dict)
    odct: dict[str, float] = field(default_factory=dict)
    prct: dict[str, float] = field(default_factory=dict)
    ci: dict[str, float] = field(default_factory=dict)
    cc: dict[str, float] = field(default_factory=dict)

    def cost(self, tool: str) -> float:
        if self.uniform_mode:
            return self.base_cost
        return self.ins_del_cost.get(tool, self.base_cost)

    # insertion and deletion share one formula
    cost_ins = cost
    cost_del = cost

    @classmethod
    def uniform(cls, base_cost: float = 1.0) -> CostModel:
        if base_cost <= 0:
            raise NegativeBase(f"base_cost must be positive, got {base_cost}")
        return cls(base_cost=base_cost, uniform_mode=True)

    def table(self) -> list[dict]:
        """Rows of the importance table, sorted by tool name."""
        return [
            {
                "tool": t,
                "ins_del_cost": self.ins_del_cost[t],
                "odct": self.odct[t],
                "prct": self.prct[t],
                "ci": self.ci[t],
                "cc": self.cc[t],
            }
            for t in sorted(self.ins_del_cost)
        ]


def build_cost_model(
    scores: CentralityScores,
    base_cost: float = 1.0,
    alpha: float = 1.0,
    uniform_mode: bool = False,
) -> CostModel:
    if base_cost <= 0:
        raise NegativeBase(f"base_cost must be positive, got {base_cost}")
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    tools = sorted(set(scores.odc) | set(scores.prc))
    ins_del, odct, prct, ci, cc = {}, {}, {}, {}, {}
    for t in tools:
        d = scores.odc.get(t, 0.0)
        p = scores.prc.get(t, 0.0)
        ins_del[t] = base_cost if uniform_mode else base_cost * (1.0 + (d + alpha * p) / 2.0)
        odct[t] = base_cost * (1.0 + d)
        prct[t] = base_cost * (1.0 + alpha * p)
        ci[t] = (d + p) / 2.0
        cc[t] = (odct[t] + prct[t]) / 2.0
    return CostModel(base_cost, alpha, uniform_mode, ins_del, odct, prct, ci, cc)
