"""Sub-agent registry: which agents sit on which layer and what tools they own."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from ..assets import data_path
from ..errors import ConfigError
from ..graph import ToolCatalog


@dataclass(frozen=True)
class SubAgentSpec:
    name: str
    layer: int
    description: str
    tools: tuple[str, ...]
    keywords: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = {"name": self.name, "layer": self.layer, "description": self.description, "tools": list(self.tools)}
        if self.keywords:
            out["keywords"] = list(self.keywords)
        return out


@dataclass(frozen=True)
class Registry:
    layers: int
    sub_agents: tuple[SubAgentSpec, ...]
    catalog: ToolCatalog
    layer_names: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sub_agents", tuple(self.sub_agents))
        problems = self.problems()
        if problems:
            raise ConfigError("invalid registry: " + "; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if self.layers < 1:
            out.append("layers must be >= 1")
        seen = set()
        for agent in self.sub_agents:
            key = agent.name.lower()
            if key in seen:
                out.append(f"duplicate sub-agent {agent.name}")
            seen.add(key)
            if not 1 <= agent.layer <= self.layers:
                out.append(f"{agent.name} has layer {agent.layer} outside 1..{self.layers}")
            missing = [t for t in agent.tools if t not in self.catalog]
            if missing:
                out.append(f"{agent.name} uses unknown tools {missing}")
        for layer in range(1, self.layers + 1):
            if not self.agents_in(layer):
                out.append(f"layer {layer} has no sub-agents")
        return out

    def agents_in(self, layer: int) -> list[SubAgentSpec]:
        return [a for a in self.sub_agents if a.layer == layer]

    def find(self, name: str, layer: int | None = None) -> SubAgentSpec | None:
        """Case-insensitive lookup, optionally restricted to one layer."""
        key = name.strip().lower()
        for agent in self.sub_agents:
            if agent.name.lower() == key and (layer is None or agent.layer == layer):
                return agent
        return None

    def describe_layer(self, layer: int) -> str:
        return "\n".join(f"- {a.name}: {a.description}" for a in self.agents_in(layer))

    @classmethod
    def from_dict(cls, data: Mapping, catalog: ToolCatalog) -> Registry:
        try:
            agents = tuple(
                SubAgentSpec(
                    name=a["name"],
                    layer=int(a["layer"]),
                    description=a.get("description", ""),
                    tools=tuple(a.get("tools", ())),
                    keywords=tuple(k.lower() for k in a.get("keywords", ())),
                )
                for a in data["sub_agents"]
            )
            names = {int(k): v for k, v in data.get("layer_names", {}).items()}
            return cls(int(data["layers"]), agents, catalog, names)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed registry: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path, catalog: ToolCatalog) -> Registry:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), catalog)

    @classmethod
    def bundled(cls, catalog: ToolCatalog | None = None) -> Registry:
        return cls.load(data_path("earthagent_registry.json"), catalog or ToolCatalog.bundled())

    def to_dict(self) -> dict:
        return {
            "layers": self.layers,
            "layer_names": {str(k): v for k, v in self.layer_names.items()},
            "sub_agents": [a.to_dict() for a in self.sub_agents],
        }
