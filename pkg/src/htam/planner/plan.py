"""The Plan value type every planner produces and every metric consumes."""

from __future__ import annotations

from collections.abc import Container, Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any

from ..backends import CompletionBackend, Decoding, ask
from ..errors import BackendError, PlanningFailed

ARCHITECTURES = ("htam", "cot", "react", "plan_execute", "debate", "external")


@dataclass(frozen=True)
class PlanStep:
    tool: str
    params: Mapping[str, Any] | None = None
    agent: str = ""
    layer: int | None = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"tool": self.tool}
        if self.params is not None:
            out["params"] = dict(self.params)
        if self.agent:
            out["agent"] = self.agent
        if self.layer is not None:
            out["layer"] = self.layer
        return out


@dataclass(frozen=True)
class Exchange:
    """One raw prompt/response pair, tagged with the stage that issued it."""

    stage: str
    prompt: str
    response: str

    def to_dict(self) -> dict:
        return {"stage": self.stage, "prompt": self.prompt, "response": self.response}


@dataclass
class Plan:
    steps: list[PlanStep] = field(default_factory=list)
    architecture: str = "external"
    trace: list[Exchange] = field(default_factory=list)
    quarantined: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")

    @property
    def tools(self) -> list[str]:
        return [s.tool for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)

    @classmethod
    def from_tools(cls, tools: Iterable[str], architecture: str = "external", catalog: Container[str] | None = None) -> Plan:
        """Wrap a bare tool list; names outside ``catalog`` are quarantined."""
        plan = cls(architecture=architecture)
        for t in tools:
            if catalog is None or t in catalog:
                plan.steps.append(PlanStep(t))
            else:
                plan.quarantined.append(t)
        return plan

    def to_dict(self, with_trace: bool = False) -> dict:
        out = {
            "architecture": self.architecture,
            "steps": [s.to_dict() for s in self.steps],
            "quarantined": list(self.quarantined),
            "flags": list(self.flags),
        }
        if with_trace:
            out["trace"] = [e.to_dict() for e in self.trace]
        return out


class Session:
    """Sequential backend calls for one planning run, recorded as a trace."""

    def __init__(self, backend: CompletionBackend, decoding: Decoding | None = None):
        self.backend = backend
        self.decoding = decoding or Decoding()
        self.trace: list[Exchange] = []

    def call(self, stage: str, prompt: str) -> str:
        try:
            text = ask(self.backend, prompt, self.decoding)
        except BackendError as exc:
            raise PlanningFailed(f"backend failed during {stage}: {exc}") from exc
        self.trace.append(Exchange(stage, prompt, text))
        return text
