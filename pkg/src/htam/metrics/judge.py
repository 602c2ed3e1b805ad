"""LLM-as-judge: key-set extraction and pairwise completeness verdicts."""

from __future__ import annotations

import hashlib
import json
import threading
from collections.abc import Sequence
from dataclasses import dataclass, field

from ..assets import render
from ..backends import CompletionBackend, Decoding, ask
from ..errors import BackendError, JudgeProtocolError, NoListFound
from ..parsing import parse_tool_list
from .elo import normalize_verdict


def _tools(path) -> list[str]:
    return list(getattr(path, "tools", path))


def format_flow(path) -> str:
    return json.dumps(_tools(path))


def path_digest(path) -> str:
    return hashlib.sha256(format_flow(path).encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class KeySets:
    key_gt: frozenset[str]
    key_agent: frozenset[str]
    provenance: str = "mock"
    flags: tuple[str, ...] = field(default=())


class Judge:
    """Wraps a completion backend with the judge prompts.  Key lists are
    cached per (task, kind, path digest)."""

    def __init__(self, backend: CompletionBackend, decoding: Decoding | None = None, name: str = "llm"):
        self.backend = backend
        self.decoding = decoding or Decoding()
        self.name = name
        self._cache: dict[tuple[str, str, str], tuple[list[str], tuple[str, ...]]] = {}
        self._lock = threading.Lock()

    def _ask(self, prompt: str) -> str:
        try:
            return ask(self.backend, prompt, self.decoding)
        except BackendError as exc:
            raise JudgeProtocolError(f"judge backend failed: {exc}") from exc

    def _key_call(self, kind: str, question: str, path: Sequence[str]) -> list[str]:
        if kind == "key_steps":
            prompt = render("key_steps", question=question, ground_truth_tool_flow=format_flow(path))
        else:
            prompt = render("key_tools", question=question, agent_tool_flow=format_flow(path))
        try:
            found = parse_tool_list(self._ask(prompt), key=kind).tools
        except NoListFound as exc:
            raise JudgeProtocolError(f"{kind}: no list in judge output") from exc
        allowed = set(path)
        # the judge may not invent tools
        return [t for t in dict.fromkeys(found) if t in allowed]

    def key_list(self, kind: str, task_id: str, question: str, path) -> tuple[list[str], tuple[str, ...]]:
        """Key tools of ``path``; empty answers are retried once, then replaced
        by the deduplicated path."""
        path = _tools(path)
        cache_key = (task_id, kind, path_digest(path))
        with self._lock:
            if cache_key in self._cache:
                return self._cache[cache_key]
        flags: tuple[str, ...] = ()
        if not path:
            result: list[str] = []
        else:
            result = self._key_call(kind, question, path) or self._key_call(kind, question, path)
            if not result:
                result = list(dict.fromkeys(path))
                flags = (f"{kind}_fallback",)
        with self._lock:
            self._cache[cache_key] = (result, flags)
        return result, flags

    def verdict(self, question: str, label_a: str, path_a, label_b: str, path_b) -> str:
        prompt = render(
            "completeness",
            question=question,
            agent_a=label_a,
            tool_flow_a=format_flow(path_a),
            agent_b=label_b,
            tool_flow_b=format_flow(path_b),
        )
        return normalize_verdict(self._ask(prompt))


def extract_key_sets(judge: Judge, task, agent_path) -> KeySets:
    """``task`` needs ``task_id``, ``question`` and ``ground_truth``."""
    gt, gt_flags = judge.key_list("key_steps", task.task_id, task.question, task.ground_truth)
    agent, agent_flags = judge.key_list("key_tools", task.task_id, task.question, agent_path)
    return KeySets(frozenset(gt), frozenset(agent), judge.name, gt_flags + agent_flags)
