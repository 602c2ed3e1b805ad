"""Offline stand-in for an LLM that understands every prompt this package
sends.

It recognises each prompt by a marker phrase and answers with a small,
deterministic rule: agents are routed by registry keywords, tools are picked
by token overlap with the question, judges compare unique-tool counts.  The
answers are plausible rather than smart; the point is that every stage of
planning, scoring and benchmark generation runs end to end without a
network, and the output is a pure function of the prompt.
"""

from __future__ import annotations

import json
import re
from collections.abc import Mapping, Sequence

from .. import assets
from .base import Completion, CompletionRequest
from .embedding import tokens

_ITEM = re.compile(r"^-\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*?)\))?\s*:\s*(.*)$")

ACQUISITION = ("recommend_satellite_platforms", "download_satellite_imagery")
PREPROCESSING = ("geometric_correction", "atmospheric_correction", "cloud_mask_removal", "crop_image")
TAIL = ("statistical_analysis", "generate_analysis_reports")

# tool-name tokens too generic to signal relevance
GENERIC = {
    "analyze", "analysis", "assess", "calculate", "classify", "data", "detect", "estimate", "evaluate",
    "extract", "generate", "get", "identify", "image", "imagery", "map", "monitor", "predict", "quantify",
    "report", "reports", "segment", "satellite", "current", "time", "text", "file", "format", "read",
    "download", "recommend", "platforms", "level", "type", "patterns", "individual", "statistical",
}


def _similar(word: str, vocab: set[str]) -> bool:
    if word in vocab:
        return True
    if len(word) < 5:
        return False
    return any(len(v) >= 5 and v[:5] == word[:5] for v in vocab)


def _field(prompt: str, label: str) -> str:
    m = re.search(rf"^\s*{re.escape(label)}\s*(.*)$", prompt, re.MULTILINE)
    return m.group(1).strip() if m else ""


def _query(prompt: str) -> str:
    for label in ("User question:", "Original Question:", "Question:", "Task question:"):
        value = _field(prompt, label)
        if value:
            return value
    return ""


def _listed(prompt: str, header: str) -> list[tuple[str, str, str]]:
    """``(name, params, description)`` for each ``- item`` line following the
    line that contains ``header``."""
    lines = prompt.splitlines()
    for i, line in enumerate(lines):
        if header in line:
            out = []
            for nxt in lines[i + 1 :]:
                m = _ITEM.match(nxt.strip())
                if m:
                    out.append((m.group(1), m.group(2) or "", m.group(3)))
                elif out or nxt.strip():
                    break
            return out
    return []


def _json_after(prompt: str, label: str):
    m = re.search(rf"{re.escape(label)}\s*(\[.*?\])", prompt)
    if not m:
        return []
    try:
        return json.loads(m.group(1))
    except ValueError:
        return []


def _overlap(name: str, vocab: set[str]) -> int:
    return sum(1 for t in name.split("_") if t not in GENERIC and _similar(t, vocab))


def _relevant(query: str, names: Sequence[str], limit: int | None = None) -> list[str]:
    vocab = set(tokens(query))
    scored = [(-_overlap(n, vocab), i, n) for i, n in enumerate(names)]
    picked = [n for s, _, n in sorted(scored) if s < 0]
    return picked[:limit] if limit else picked


def _dedupe(items: Sequence[str]) -> list[str]:
    return list(dict.fromkeys(items))


class HeuristicBackend:
    def __init__(self, agent_keywords: Mapping[str, Sequence[str]] | None = None):
        if agent_keywords is None:
            registry = json.loads(assets.data_path("earthagent_registry.json").read_text(encoding="utf-8"))
            agent_keywords = {a["name"]: a.get("keywords", []) for a in registry["sub_agents"]}
        self.agent_keywords = {k.lower(): [w.lower() for w in v] for k, v in agent_keywords.items()}

    def complete(self, request: CompletionRequest) -> Completion:
        return Completion(self.respond(request.prompt))

    # dispatch -------------------------------------------------------------

    def respond(self, prompt: str) -> str:
        routes = (
            ("Select the most suitable third layer expert", self._select_top),
            ("choose layer 2 experts", lambda p: self._select_many(p, 3, default_first=False)),
            ("choose layer 1 experts", lambda p: self._select_many(p, 2, default_first=True)),
            ("Your tools:", self._sub_agent_tools),
            ("judge/summarizer for a multi-agent debate", self._debate_judge),
            ("refined_tool_trajectory", self._debate_round),
            ("initial_tool_trajectory", self._debate_opening),
            ("create an execution plan", self._plan_execute),
            ("think step by step", self._cot),
            ('start with "Thought: "', self._react_thought),
            ("decide the next action", self._react_action),
            ("fully imagine", self._react_observation),
            ("key steps (indispensable steps)", lambda p: self._key_list(p, "key_steps", "Ground truth tool path:")),
            ("key tools (indispensable tools)", lambda p: self._key_list(p, "key_tools", "Agent's tool path:")),
            ("return only one string", self._completeness),
            ("Generate a typical task dependency template", self._dag_template),
            ("parameterized_tools", self._parameterize),
            ("Generate a remote sensing analysis task", self._question),
        )
        for marker, handler in routes:
            if marker in prompt:
                return handler(prompt)
        return ""

    # hierarchical selection ----------------------------------------------

    def _agent_score(self, name: str, query: str) -> int:
        text = query.lower()
        vocab = set(tokens(text))
        score = 0
        for kw in self.agent_keywords.get(name.lower(), ()):
            score += (kw in text) if " " in kw else _similar(kw, vocab)
        return score

    def _ranked_agents(self, prompt: str) -> tuple[list[str], list[str]]:
        names = [n for n, _, _ in _listed(prompt, "Available experts:")]
        query = _query(prompt)
        scored = sorted((-self._agent_score(n, query), i, n) for i, n in enumerate(names))
        return names, [n for s, _, n in scored if s < 0]

    def _select_top(self, prompt: str) -> str:
        names, ranked = self._ranked_agents(prompt)
        if ranked:
            choice = ranked[0]
        else:
            chat = [n for n in names if "chat" in n.lower()]
            choice = chat[0] if chat else (names[0] if names else "")
        return json.dumps({"selected_agent": choice, "subtask": f"Produce the final answer to: {_query(prompt)}"})

    def _select_many(self, prompt: str, cap: int, default_first: bool) -> str:
        names, ranked = self._ranked_agents(prompt)
        chosen = ([names[0]] if default_first and names else []) + ranked
        chosen = _dedupe(chosen)[:cap] or names[:1]
        query = _query(prompt)
        return json.dumps({"selected_agents": [{"name": n, "subtask": f"Support the question: {query}"} for n in chosen]})

    def _sub_agent_tools(self, prompt: str) -> str:
        names = [n for n, _, _ in _listed(prompt, "Your tools:")]
        vocab = set(tokens(_query(prompt) + " " + _field(prompt, "Your subtask:")))
        picked = names[:2] + [n for n in names[2:] if _overlap(n, vocab) > 0]
        return json.dumps({"tools": picked})

    # baselines -------------------------------------------------------------

    def _catalog_names(self, prompt: str) -> list[str]:
        return [n for n, _, _ in _listed(prompt, "Available tools:")]

    def _cot(self, prompt: str) -> str:
        names = self._catalog_names(prompt)
        query = _query(prompt)
        tools = _dedupe([t for t in ACQUISITION[1:] if t in names] + _relevant(query, names, 3)) or names[:1]
        return "\n".join(f"step{i + 1}: use {t.replace('_', ' ')} for this part of the question;{t}" for i, t in enumerate(tools))

    def _plan_execute(self, prompt: str) -> str:
        names = self._catalog_names(prompt)
        query = _query(prompt)
        tools = [t for t in ACQUISITION[1:] if t in names] + _relevant(query, names, 4) + [t for t in TAIL[1:] if t in names]
        return json.dumps({"plan": [{"tool": t, "parameters": {}} for t in _dedupe(tools)]}, indent=2)

    def _react_candidates(self, prompt: str) -> list[str]:
        names = self._catalog_names(prompt)
        return _dedupe([t for t in ACQUISITION[1:] if t in names] + _relevant(_query(prompt), names, 2))

    def _react_thought(self, prompt: str) -> str:
        try:
            previous = json.loads(_field(prompt, "Your previous_tool_calls:") or "[]")
        except ValueError:
            previous = []
        done = {p.split("(", 1)[0] for p in previous}
        for tool in self._react_candidates(prompt):
            if tool not in done:
                return f"Thought: I should call {tool} next to make progress on the question."
        return "Thought: I have gathered sufficient information and can provide a comprehensive answer to this question."

    def _react_action(self, prompt: str) -> str:
        m = re.search(r"I should call ([A-Za-z0-9_]+) next", _field(prompt, "Your thought:"))
        if not m:
            return "FINISH"
        return json.dumps({"tool": m.group(1), "arguments": {}})

    def _react_observation(self, prompt: str) -> str:
        return f"The {_field(prompt, 'Tool name:')} tool ran and produced results relevant to the scenario."

    def _debate_opening(self, prompt: str) -> str:
        names = self._catalog_names(prompt)
        tools = _dedupe([t for t in ACQUISITION[1:] if t in names] + _relevant(_query(prompt), names, 3))
        return json.dumps({"plan": "Acquire imagery, then run the analysis tools the question calls for.", "initial_tool_trajectory": tools})

    def _debate_round(self, prompt: str) -> str:
        names = self._catalog_names(prompt)
        try:
            former = json.loads(_field(prompt, "your former response:") or "[]")
        except ValueError:
            former = []
        refined = _dedupe(list(former) + [t for t in TAIL[1:] if t in names])
        return json.dumps({"advice": "Close the chain with a report step.", "refined_tool_trajectory": refined})

    def _debate_judge(self, prompt: str) -> str:
        rounds = re.split(r"^Round \d+:\s*$", prompt, flags=re.MULTILINE)
        last = rounds[-1] if len(rounds) > 1 else prompt
        best: list[str] = []
        for m in re.finditer(r"^Debater \d+: (\[.*\])\s*$", last, re.MULTILINE):
            answer = json.loads(m.group(1))
            if len(answer) > len(best):
                best = answer
        return json.dumps({"final_tool_trajectory": best})

    # judge -----------------------------------------------------------------

    def _key_list(self, prompt: str, key: str, label: str) -> str:
        return json.dumps({key: _dedupe(_json_after(prompt, label))})

    def _completeness(self, prompt: str) -> str:
        def unique(side: str) -> int:
            m = re.search(rf"^Agent {side} \(.*?\): (\[.*\])\s*$", prompt, re.MULTILINE)
            return len(set(json.loads(m.group(1)))) if m else 0

        a, b = unique("A"), unique("B")
        return "A" if a > b else "B" if b > a else "Tie"

    # benchmark generation --------------------------------------------------

    def _dag_template(self, prompt: str) -> str:
        m = re.search(r"for remote sensing (.+?) domain", prompt)
        domain = m.group(1) if m else ""
        listed = _listed(prompt, "Available tools:")
        names = [n for n, _, _ in listed]
        rng = re.search(r"Select (\d+)", prompt)
        lo = int(rng.group(1)) if rng else 6
        length = max(3, lo - 2)

        keywords = assets.domain_keywords().get(domain, [])
        fixed = set(ACQUISITION) | set(PREPROCESSING) | set(TAIL)

        def domain_score(item) -> int:
            text = f"{item[0].replace('_', ' ')} {item[2]}".lower()
            return sum(1 for kw in keywords if kw in text)

        pool = [n for s, _, n in sorted((-domain_score(it), i, it[0]) for i, it in enumerate(listed)) if n not in fixed]
        pre = [t for t in ("recommend_satellite_platforms",) + PREPROCESSING if t in names]
        head = [t for t in ACQUISITION[1:] if t in names]
        tail = [t for t in TAIL if t in names]
        middle = length - len(head) - len(tail)
        n_domain = max(1, (middle + 1) // 2)
        n_pre = min(len(pre), middle - n_domain)
        n_domain = middle - n_pre
        # recommend_satellite_platforms, when used, runs before the download
        pre_used = pre[:n_pre]
        before = [t for t in pre_used if t == "recommend_satellite_platforms"]
        after = [t for t in pre_used if t != "recommend_satellite_platforms"]
        backbone = before + head + after + pool[:n_domain] + tail
        alternates = pool[n_domain : n_domain + max(0, lo - length)]

        stages = [[t] for t in backbone]
        first_domain = len(before) + len(head) + len(after)
        for k, alt in enumerate(alternates):
            stages[min(first_domain + k, len(stages) - len(tail) - 1)].append(alt)
        nodes = [t for stage in stages for t in stage]
        edges = [[u, v] for s1, s2 in zip(stages, stages[1:]) for u in s1 for v in s2]
        return json.dumps(
            {"domain": domain, "nodes": nodes, "edges": edges, "description": f"DAG template based on actual needs in {domain} domain"},
            indent=2,
        )

    def _parameterize(self, prompt: str) -> str:
        sequence = _json_after(prompt, "Tool sequence:")
        schemas = {n: p for n, p, _ in _listed(prompt, "Tool details:")}
        out = []
        for i, tool in enumerate(sequence):
            params = {}
            for part in filter(None, (s.strip() for s in schemas.get(tool, "").split(","))):
                pname, _, ptype = (x.strip() for x in part.partition(":"))
                params[pname.rstrip("?")] = _param_value(pname.rstrip("?"), ptype, i)
            out.append({"tool": tool, "params": params})
        return json.dumps({"parameterized_tools": out}, indent=2)

    def _question(self, prompt: str) -> str:
        flow = re.findall(r"^\d+\.\s*([A-Za-z0-9_]+)\(", prompt, re.MULTILINE)
        fixed = set(ACQUISITION) | set(PREPROCESSING) | set(TAIL)
        focus = [t for t in flow if t not in fixed] or flow
        if not focus:
            return ""
        main = focus[-1].replace("_", " ")
        extra = ", ".join(t.replace("_", " ") for t in focus[:-1])
        detail = f" drawing on {extra}" if extra else ""
        return f"Can you {main} across the study region for 2023{detail}, and summarize what it means for local planning?"


def _param_value(name: str, ptype: str, index: int):
    if ptype == "bbox":
        return [-122.52, 37.70, -122.35, 37.83]
    if ptype == "coordinates":
        return [37.77, -122.42]
    if ptype == "date":
        return "2023-01-01" if "start" in name else "2023-12-31"
    if ptype == "number":
        return 10
    if ptype == "list":
        return ["ndvi"]
    if name.startswith("image") or name.endswith("_path"):
        return f"data/step_{index + 1}.tif"
    if name == "date_range":
        return "2023-01-01/2023-12-31"
    return f"{name.replace('_', ' ')} for the study region"
