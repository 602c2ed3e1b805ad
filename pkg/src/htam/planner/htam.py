"""Hierarchical planner: choose sub-agents from the top layer down, then
assemble their tool calls from the bottom layer up."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from ..assets import render
from ..backends import CompletionBackend, Decoding
from ..errors import EmptySelection, NoListFound, UnparseableSelection
from ..parsing import extract_json, parse_tool_list
from .plan import Plan, PlanStep, Session
from .registry import Registry


@dataclass(frozen=True)
class Selection:
    layer: int
    chosen: tuple[tuple[str, str], ...]
    dropped: tuple[str, ...] = ()

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.chosen]


@dataclass(frozen=True)
class HtamSettings:
    # per-layer cap on chosen sub-agents; the top layer always picks one
    max_agents: Mapping[int, int] = field(default_factory=lambda: {1: 2, 2: 3})
    decoding: Decoding = field(default_factory=Decoding)

    def cap(self, layer: int, top: int) -> int:
        if layer == top:
            return 1
        return self.max_agents.get(layer, 3)


def _selection_prompt(query: str, layer: int, higher: Sequence[Selection], registry: Registry) -> str:
    top = registry.layers
    if layer == top:
        return render("htam_layer_top", layer3_agents_info=registry.describe_layer(layer), query=query)
    top_sel = higher[-1]
    top_agent, top_task = top_sel.chosen[0]
    if layer == 1:
        above = higher[0]
        layer_info = "; ".join(f"{n} ({t})" if t else n for n, t in above.chosen)
        return render(
            "htam_layer_bottom",
            layer1_agents_info=registry.describe_layer(layer),
            query=query,
            layer2_info=layer_info,
            layer3_agent=top_agent,
        )
    return render(
        "htam_layer_middle",
        layer2_agents_info=registry.describe_layer(layer),
        query=query,
        layer3_agent=top_agent,
        layer3_subtask=top_task,
    )


def _raw_choices(value) -> list[tuple[str, str]]:
    if isinstance(value, dict):
        if "selected_agent" in value:
            value = [{"name": value["selected_agent"], "subtask": value.get("subtask", "")}]
        elif "selected_agents" in value:
            value = value["selected_agents"]
        else:
            value = [value]
    if not isinstance(value, list):
        raise UnparseableSelection("selection is neither an object nor a list")
    out = []
    for item in value:
        if isinstance(item, str):
            out.append((item, ""))
        elif isinstance(item, dict):
            name = item.get("name") or item.get("agent") or item.get("selected_agent")
            if isinstance(name, str):
                out.append((name, str(item.get("subtask", ""))))
    return out


def parse_selection(text: str, layer: int, registry: Registry, cap: int) -> Selection:
    try:
        value = extract_json(text)
    except NoListFound as exc:
        raise UnparseableSelection(f"layer {layer}: no JSON selection in output") from exc
    chosen, dropped, seen = [], [], set()
    for name, subtask in _raw_choices(value):
        agent = registry.find(name, layer)
        if agent is None:
            dropped.append(name)
        elif agent.name not in seen:
            seen.add(agent.name)
            chosen.append((agent.name, subtask))
    if not chosen:
        raise EmptySelection(f"layer {layer}: no registered sub-agent selected (got {dropped})")
    return Selection(layer, tuple(chosen[:cap]), tuple(dropped))


def select_layer(
    query: str,
    layer_index: int,
    higher_selections: Sequence[Selection],
    registry: Registry,
    backend: CompletionBackend,
    settings: HtamSettings | None = None,
    session: Session | None = None,
) -> Selection:
    """Pick sub-agents for ``layer_index`` given the selections of every layer
    above it (ordered from ``layer_index + 1`` up to the top)."""
    settings = settings or HtamSettings()
    expected = list(range(layer_index + 1, registry.layers + 1))
    if [s.layer for s in higher_selections] != expected:
        raise ValueError(f"layer {layer_index} needs selections for layers {expected}")
    session = session or Session(backend, settings.decoding)
    prompt = _selection_prompt(query, layer_index, higher_selections, registry)
    text = session.call(f"select:{layer_index}", prompt)
    return parse_selection(text, layer_index, registry, settings.cap(layer_index, registry.layers))


def _context(selections: Sequence[Selection]) -> str:
    lines = []
    for sel in sorted(selections, key=lambda s: -s.layer):
        for name, subtask in sel.chosen:
            lines.append(f"- layer {sel.layer}: {name}: {subtask}".rstrip(": "))
    return "\n".join(lines)


def plan_htam(
    query: str,
    registry: Registry,
    backend: CompletionBackend,
    settings: HtamSettings | None = None,
) -> Plan:
    settings = settings or HtamSettings()
    session = Session(backend, settings.decoding)
    plan = Plan(architecture="htam", trace=session.trace)

    # top-down selection: layer l sees the choices of layers l+1..L
    higher: list[Selection] = []
    for layer in range(registry.layers, 0, -1):
        sel = select_layer(query, layer, higher, registry, backend, settings, session)
        if sel.dropped:
            plan.flags.append(f"dropped_agents:{layer}:{','.join(sel.dropped)}")
        higher.insert(0, sel)

    # bottom-up assembly: layer-1 tools first
    context = _context(higher)
    for sel in higher:
        for name, subtask in sel.chosen:
            agent = registry.find(name, sel.layer)
            prompt = render(
                "htam_sub_agent_tools",
                agent_name=agent.name,
                layer=agent.layer,
                agent_description=agent.description,
                query=query,
                subtask=subtask or query,
                context=context,
                tools_info=registry.catalog.describe(agent.tools),
            )
            text = session.call(f"tools:{agent.name}", prompt)
            try:
                picked = parse_tool_list(text, set(agent.tools), key="tools")
            except NoListFound:
                plan.flags.append(f"unparseable_tools:{agent.name}")
                continue
            plan.quarantined.extend(picked.rejects)
            plan.steps.extend(PlanStep(t, agent=agent.name, layer=agent.layer) for t in picked.tools)
    if not plan.steps:
        plan.flags.append("empty_plan")
    return plan
