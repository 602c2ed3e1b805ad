"""Tool catalog and dependency-graph core.

A domain's procedures are modelled as a DAG over tool names: an edge
``(u, v)`` means ``u`` must run before ``v``.  This module validates such
graphs, stratifies them into ordered layers, and extracts source-to-sink
tool paths.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .errors import CyclicGraph, InvalidMerge, MissingNode, NonMonotoneMerge

Edge = tuple[str, str]


@dataclass(frozen=True)
class ToolParam:
    name: str
    type: str = "string"
    required: bool = False


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    params: tuple[ToolParam, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise ValueError("tool name must be non-empty")
        if not self.description:
            raise ValueError(f"tool {self.name!r} has an empty description")

    @property
    def param_names(self) -> list[str]:
        return [p.name for p in self.params]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "params": [{"name": p.name, "type": p.type, "required": p.required} for p in self.params],
        }


class ToolCatalog:
    """Ordered, name-unique collection of :class:`ToolSpec`."""

    def __init__(self, tools: Iterable[ToolSpec]):
        self._tools: dict[str, ToolSpec] = {}
        for tool in tools:
            if tool.name in self._tools:
                raise ValueError(f"duplicate tool name {tool.name!r}")
            self._tools[tool.name] = tool

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> ToolCatalog:
        tools = []
        for rec in records:
            params = tuple(
                ToolParam(p["name"], p.get("type", "string"), bool(p.get("required", False)))
                for p in rec.get("params", [])
            )
            tools.append(ToolSpec(rec["name"], rec["description"], params))
        return cls(tools)

    @classmethod
    def load(cls, path: str | Path) -> ToolCatalog:
        with open(path, encoding="utf-8") as fh:
            return cls.from_records(json.load(fh))

    @classmethod
    def bundled(cls) -> ToolCatalog:
        from .assets import data_path

        return cls.load(data_path("catalog.json"))

    def to_records(self) -> list[dict]:
        return [t.to_dict() for t in self._tools.values()]

    def __contains__(self, name: object) -> bool:
        return name in self._tools

    def __getitem__(self, name: str) -> ToolSpec:
        return self._tools[name]

    def __iter__(self):
        return iter(self._tools.values())

    def __len__(self) -> int:
        return len(self._tools)

    @property
    def names(self) -> list[str]:
        return list(self._tools)

    def get(self, name: str) -> ToolSpec | None:
        return self._tools.get(name)

    def subset(self, names: Iterable[str]) -> ToolCatalog:
        return ToolCatalog(self._tools[n] for n in dict.fromkeys(names) if n in self._tools)

    def describe(self, names: Iterable[str] | None = None) -> str:
        """Render ``- name: description`` lines, the tool block used in prompts."""
        chosen = self._tools.values() if names is None else (self._tools[n] for n in names if n in self._tools)
        lines = []
        for tool in chosen:
            params = ", ".join(f"{p.name}{'' if p.required else '?'}: {p.type}" for p in tool.params)
            lines.append(f"- {tool.name}({params}): {tool.description}")
        return "\n".join(lines)


@dataclass(frozen=True)
class DependencyGraph:
    """Directed graph over tool names.  Construction does not validate; see
    :func:`validate_dag`."""

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    domain: str = ""
    description: str = ""

    def __init__(self, nodes: Iterable[str], edges: Iterable[Sequence[str]], domain: str = "", description: str = ""):
        object.__setattr__(self, "nodes", tuple(dict.fromkeys(nodes)))
        object.__setattr__(self, "edges", tuple(dict.fromkeys((str(u), str(v)) for u, v in edges)))
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "description", description)

    @cached_property
    def successors(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n: [] for n in self.nodes}
        for u, v in self.edges:
            if u in out and v in out:
                out[u].append(v)
        for targets in out.values():
            targets.sort()
        return out

    @cached_property
    def predecessors(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n: [] for n in self.nodes}
        for u, v in self.edges:
            if u in out and v in out:
                out[v].append(u)
        for sources in out.values():
            sources.sort()
        return out

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def out_degree(self, node: str) -> int:
        return len(self.successors[node])

    def in_degree(self, node: str) -> int:
        return len(self.predecessors[node])

    def sources(self) -> list[str]:
        return sorted(n for n in self.nodes if not self.predecessors[n])

    def sinks(self) -> list[str]:
        return sorted(n for n in self.nodes if not self.successors[n])

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "nodes": list(self.nodes),
            "edges": [list(e) for e in self.edges],
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> DependencyGraph:
        return cls(data.get("nodes", []), data.get("edges", []), data.get("domain", ""), data.get("description", ""))

    @classmethod
    def load(cls, path: str | Path) -> DependencyGraph:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)


@dataclass(frozen=True)
class Violation:
    kind: str  # "cycle" | "dangling" | "self-loop"
    detail: str

    def __str__(self) -> str:
        return self.detail


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def messages(self) -> list[str]:
        return [v.detail for v in self.violations]


def _find_cycle(nodes: Sequence[str], succ: Mapping[str, Sequence[str]]) -> list[str] | None:
    """Return one witness cycle ``[v0, ..., v0]`` or None (iterative DFS)."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {n: WHITE for n in nodes}
    for root in sorted(nodes):
        if colour[root] != WHITE:
            continue
        stack = [(root, iter(succ[root]))]
        path = [root]
        colour[root] = GREY
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[node] = BLACK
                stack.pop()
                path.pop()
            elif colour[nxt] == GREY:
                return path[path.index(nxt):] + [nxt]
            elif colour[nxt] == WHITE:
                colour[nxt] = GREY
                stack.append((nxt, iter(succ[nxt])))
                path.append(nxt)
    return None


def validate_dag(graph: DependencyGraph) -> ValidationReport:
    """Report dangling endpoints, self-loops and (one witness) cycle."""
    violations: list[Violation] = []
    known = set(graph.nodes)
    for u, v in graph.edges:
        for end in (u, v):
            if end not in known:
                violations.append(Violation("dangling", f"dangling endpoint {end}"))
        if u == v and u in known:
            violations.append(Violation("self-loop", f"self-loop: {u}"))
    succ = {n: [v for v in graph.successors[n] if v != n] for n in graph.nodes}
    cycle = _find_cycle(graph.nodes, succ)
    if cycle:
        violations.append(Violation("cycle", "cycle: " + ",".join(cycle)))
    return ValidationReport(tuple(violations))


@dataclass(frozen=True)
class LayerAssignment:
    layer_of: Mapping[str, int]
    layer_count: int = field(init=False)

    def __post_init__(self):
        layers = set(self.layer_of.values())
        count = max(layers, default=0)
        if layers != set(range(1, count + 1)):
            raise ValueError(f"layer indices must cover 1..{count} without gaps, got {sorted(layers)}")
        object.__setattr__(self, "layer_of", dict(self.layer_of))
        object.__setattr__(self, "layer_count", count)

    def layers(self) -> dict[int, list[str]]:
        """Layer index to sorted member list, i.e. the partition V_1..V_L."""
        out: dict[int, list[str]] = {i: [] for i in range(1, self.layer_count + 1)}
        for node, layer in self.layer_of.items():
            out[layer].append(node)
        return {k: sorted(v) for k, v in out.items()}


def topological_order(graph: DependencyGraph) -> list[str]:
    """Kahn's algorithm with lexicographic tie-breaking."""
    import heapq

    indeg = {n: graph.in_degree(n) for n in graph.nodes}
    ready = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for nxt in graph.successors[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != len(graph.nodes):
        raise CyclicGraph("graph has a cycle; no topological order exists")
    return order


def stratify_longest_path(graph: DependencyGraph) -> LayerAssignment:
    """Longest-path layering: sources at layer 1, every edge strictly climbs."""
    report = validate_dag(graph)
    if not report.ok:
        raise CyclicGraph("; ".join(report.messages()))
    layer: dict[str, int] = {}
    for node in topological_order(graph):
        layer[node] = 1 + max((layer[p] for p in graph.predecessors[node]), default=0)
    return LayerAssignment(layer)


def coarsen_layers(
    assignment: LayerAssignment,
    merge_map: Mapping[int, int],
    graph: DependencyGraph | None = None,
) -> LayerAssignment:
    """Relabel fine layers through ``merge_map`` (fine index -> coarse index).

    The map must be nondecreasing and onto ``1..L'``; such a map can never
    reverse an edge, though it may put both endpoints in one layer.
    """
    fine = list(range(1, assignment.layer_count + 1))
    missing = [i for i in fine if i not in merge_map]
    if missing:
        raise InvalidMerge(f"merge map lacks fine layers {missing}")
    for lo, hi in zip(fine, fine[1:]):
        if merge_map[lo] > merge_map[hi]:
            raise NonMonotoneMerge(f"layer {lo}->{merge_map[lo]} but layer {hi}->{merge_map[hi]}")
    targets = {merge_map[i] for i in fine}
    if targets != set(range(1, len(targets) + 1)):
        raise InvalidMerge(f"merge map is not onto 1..{len(targets)}: {sorted(targets)}")
    coarse = LayerAssignment({n: merge_map[l] for n, l in assignment.layer_of.items()})
    if graph is not None and check_stratification(graph, coarse):
        raise NonMonotoneMerge("merge inverts at least one edge")
    return coarse


def check_stratification(graph: DependencyGraph, assignment: LayerAssignment) -> list[Edge]:
    """Edges whose source sits in a higher layer than their target."""
    missing = [n for n in graph.nodes if n not in assignment.layer_of]
    if missing:
        raise MissingNode(f"no layer for {', '.join(sorted(missing))}")
    lay = assignment.layer_of
    return [(u, v) for u, v in graph.edges if lay[u] > lay[v]]


def enumerate_paths(graph: DependencyGraph, max_paths: int = 64, max_len: int = 20) -> list[list[str]]:
    """Source-to-sink simple paths in lexicographic depth-first order."""
    sinks = set(graph.sinks())
    paths: list[list[str]] = []

    def walk(path: list[str]) -> None:
        if len(paths) >= max_paths:
            return
        node = path[-1]
        if node in sinks:
            paths.append(list(path))
            return
        if len(path) >= max_len:
            return
        for nxt in graph.successors[node]:
            if nxt not in path:
                path.append(nxt)
                walk(path)
                path.pop()

    for src in graph.sources():
        walk([src])
    return paths[:max_paths]


def is_graph_path(graph: DependencyGraph, path: Sequence[str]) -> bool:
    return bool(path) and all((u, v) in graph.edge_set for u, v in zip(path, path[1:]))


def aggregate_paths(paths: Iterable[Sequence[str]], domain: str = "", description: str = "") -> DependencyGraph:
    """Union of consecutive-step edges over many tool paths.

    Edges that would close a cycle (seen in a different order by an earlier
    path) are skipped, so the result is always a DAG.
    """
    nodes: dict[str, None] = {}
    succ: dict[str, set[str]] = {}
    edges: list[Edge] = []

    def reaches(a: str, b: str) -> bool:
        stack, seen = [a], {a}
        while stack:
            cur = stack.pop()
            if cur == b:
                return True
            for nxt in succ.get(cur, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    for path in paths:
        for tool in path:
            nodes.setdefault(tool)
        for u, v in zip(path, path[1:]):
            if u == v or v in succ.get(u, ()):
                continue
            if reaches(v, u):
                continue
            succ.setdefault(u, set()).add(v)
            edges.append((u, v))
    return DependencyGraph(nodes, edges, domain, description)
