"""Single-agent and debate baselines: chain-of-thought, ReAct,
plan-and-execute, and multi-agent debate."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..assets import load_prompt, render
from ..backends import CompletionBackend, Decoding
from ..errors import NoListFound, PlanningFailed, UnparseableSelection
from ..graph import ToolCatalog
from ..parsing import extract_json, parse_tool_list
from .plan import Plan, PlanStep, Session

_STEP_LINE = re.compile(r"^\W*step\s*(\d+)\s*[:：.)-]\s*(.*)$", re.IGNORECASE)

REACT_SYSTEM_PROMPT = (
    "You are a remote sensing analysis assistant. You solve the user's question "
    "by reasoning about it and calling the available tools one at a time."
)


def _clean_tool(text: str) -> str:
    return text.strip().strip("`'\"*").rstrip(".").strip()


def plan_cot(query: str, catalog: ToolCatalog, backend: CompletionBackend, decoding: Decoding | None = None) -> Plan:
    session = Session(backend, decoding)
    text = session.call("cot", render("cot", query=query, tools_info=catalog.describe()))
    plan = Plan(architecture="cot", trace=session.trace)
    found = False
    for line in text.splitlines():
        m = _STEP_LINE.match(line)
        if not m:
            continue
        found = True
        body = m.group(2)
        # "thought;tool" - the tool is whatever follows the last separator
        tool = _clean_tool(re.split(r"[;；]", body)[-1])
        if tool in catalog:
            plan.steps.append(PlanStep(tool))
        else:
            plan.quarantined.append(tool)
    if not found:
        raise UnparseableSelection("no 'stepN:' lines in chain-of-thought output")
    return plan


def _parse_action(text: str) -> tuple[str, dict] | None:
    """``(tool, arguments)``, or None for a no-call (FINISH) reply."""
    try:
        value = extract_json(text)
    except NoListFound:
        return None
    if isinstance(value, dict):
        name = value.get("tool") or value.get("name") or value.get("function")
        if isinstance(name, str) and name.strip():
            args = value.get("arguments", value.get("parameters", {}))
            return _clean_tool(name), args if isinstance(args, dict) else {}
    return None


def plan_react(
    query: str,
    catalog: ToolCatalog,
    backend: CompletionBackend,
    max_steps: int = 10,
    decoding: Decoding | None = None,
) -> Plan:
    """Thought, action, imagined observation; repeats until the model makes
    no call or ``max_steps`` iterations have run."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    session = Session(backend, decoding)
    plan = Plan(architecture="react", trace=session.trace)
    history: list[str] = []
    calls: list[str] = []
    tools_info = catalog.describe()
    action_format = load_prompt("react_action_format")
    try:
        for _ in range(max_steps):
            shared = dict(query=query, history="\n".join(history) or "None", previous_tool_calls=json.dumps(calls))
            thought = session.call("thought", render("react_thought", system_prompt=REACT_SYSTEM_PROMPT, tools_info=tools_info, **shared))
            thought = thought.strip()
            reply = session.call("action", render("react_action", thought=thought, **shared) + action_format)
            action = _parse_action(reply)
            if action is None:
                plan.flags.append("finished" if plan.steps or plan.quarantined else "finished_without_action")
                break
            tool, args = action
            calls.append(f"{tool}({json.dumps(args, sort_keys=True)})")
            spec = catalog.get(tool)
            if spec is None:
                plan.quarantined.append(tool)
                observation = f"Tool {tool} does not exist."
            else:
                plan.steps.append(PlanStep(tool, args))
                observation = session.call(
                    "observation",
                    render("react_observation", thought=thought, tool_name=tool, tool_description=spec.description, args=json.dumps(args)),
                ).strip()
            history.append(f"{thought}\nAction: {tool}\nObservation: {observation}")
        else:
            plan.flags.append("max_steps_reached")
    except PlanningFailed:
        plan.flags.append("transport_error")
    return plan


def plan_plan_execute(query: str, catalog: ToolCatalog, backend: CompletionBackend, decoding: Decoding | None = None) -> Plan:
    """One planning call, no revision pass."""
    session = Session(backend, decoding)
    text = session.call("plan", render("plan_execute", query=query, tools_info=catalog.describe()))
    try:
        value = extract_json(text)
    except NoListFound as exc:
        raise UnparseableSelection("no JSON plan in output") from exc
    items = value.get("plan") if isinstance(value, dict) else value
    if not isinstance(items, list):
        raise UnparseableSelection("output has no 'plan' list")
    plan = Plan(architecture="plan_execute", trace=session.trace)
    for item in items:
        if isinstance(item, dict):
            tool = item.get("tool") or item.get("name") or ""
            params = item.get("parameters", item.get("params"))
        else:
            tool, params = item, None
        tool = _clean_tool(str(tool))
        if tool in catalog:
            plan.steps.append(PlanStep(tool, params if isinstance(params, dict) else None))
        elif tool:
            plan.quarantined.append(tool)
    return plan


@dataclass(frozen=True)
class DebateSchedule:
    opening: int = 1
    free: int = 2
    judge: int = 1

    def __post_init__(self):
        if self.opening != 1 or self.judge != 1:
            raise ValueError("a debate has exactly one opening and one judge round")
        if self.free < 0:
            raise ValueError("free rounds must be >= 0")

    def calls(self, debaters: int) -> int:
        return debaters * (self.opening + self.free) + self.judge


def _history_str(rounds: list[list[list[str]]]) -> str:
    lines = []
    for r, answers in enumerate(rounds):
        lines.append(f"Round {r}:")
        lines.extend(f"Debater {i + 1}: {json.dumps(a)}" for i, a in enumerate(answers))
    return "\n".join(lines)


def plan_debate(
    query: str,
    catalog: ToolCatalog,
    backend: CompletionBackend,
    m_debaters: int = 3,
    schedule: DebateSchedule | None = None,
    decoding: Decoding | None = None,
) -> Plan:
    if m_debaters < 2:
        raise ValueError("a debate needs at least two debaters")
    schedule = schedule or DebateSchedule()
    session = Session(backend, decoding)
    plan = Plan(architecture="debate", trace=session.trace)
    tools_info = catalog.describe()

    def answer(text: str, key: str, fallback: list[str], who: int) -> list[str]:
        try:
            # names outside the catalog survive here; only the final list is filtered
            return parse_tool_list(text, None, key=key).tools
        except NoListFound:
            plan.flags.append(f"debater_fallback:{who}")
            return list(fallback)

    opening = [
        answer(session.call(f"opening:{i + 1}", render("debate_opening", question=query, tools_info=tools_info)), "initial_tool_trajectory", [], i + 1)
        for i in range(m_debaters)
    ]
    rounds = [opening]
    for r in range(1, schedule.free + 1):
        history = _history_str(rounds)
        previous = rounds[-1]
        current = []
        for i in range(m_debaters):
            prompt = render(
                "debate_round",
                debater_index=i + 1,
                question=query,
                former_response=json.dumps(previous[i]),
                tools_info=tools_info,
                history_str=history,
            )
            current.append(answer(session.call(f"round{r}:{i + 1}", prompt), "refined_tool_trajectory", previous[i], i + 1))
        rounds.append(current)

    text = session.call("judge", render("debate_judge", question=query, tools_info=tools_info, history_str=_history_str(rounds)))
    try:
        final = parse_tool_list(text, catalog, key="final_tool_trajectory")
    except NoListFound as exc:
        raise UnparseableSelection("judge returned no final_tool_trajectory") from exc
    plan.steps.extend(PlanStep(t) for t in final.tools)
    plan.quarantined.extend(final.rejects)
    return plan
