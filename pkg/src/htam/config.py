"""Run configuration, loaded from TOML or JSON."""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PLANNERS = ("htam", "cot", "react", "plan_execute", "debate")


@dataclass
class BackendSettings:
    kind: str = "heuristic"  # heuristic | http
    api_base: str = ""
    model: str = ""
    temperature: float = 0.0
    max_tokens: int = 1024
    max_in_flight: int = 4
    cache_path: str = ""


@dataclass
class MetricSettings:
    base_cost: float = 1.0
    alpha: float = 1.0
    damping: float = 0.85
    k_factor: float = 32.0
    initial_rating: float = 1000.0
    dedup_threshold: float = 0.90
    uniform_mode: bool = False
    similarity: str = "lexical"  # exact | lexical | embedding
    shuffle_battles: bool = False


@dataclass
class PlannerSettings:
    react_max_steps: int = 10
    debaters: int = 3
    free_rounds: int = 2
    max_agents: dict[str, int] = field(default_factory=lambda: {"1": 2, "2": 3})


@dataclass
class RunConfig:
    tasks_path: str
    architectures: list[str]
    catalog_path: str = ""
    graph_path: str = ""
    registry_path: str = ""
    external_plans: dict[str, str] = field(default_factory=dict)
    backend: BackendSettings = field(default_factory=BackendSettings)
    judge: BackendSettings | None = None
    metrics: MetricSettings = field(default_factory=MetricSettings)
    planners: PlannerSettings = field(default_factory=PlannerSettings)
    parallelism: int = 1
    seed: int = 0

    def problems(self) -> list[str]:
        out = []
        if not self.architectures:
            out.append("architectures must be non-empty")
        if len(set(self.architectures)) != len(self.architectures):
            out.append("architectures must be unique")
        for arch in self.architectures:
            if arch not in PLANNERS and arch not in self.external_plans:
                out.append(f"architecture {arch!r} is neither a planner nor an external plan label")
        if self.parallelism < 1:
            out.append("parallelism must be >= 1")
        paths = [self.tasks_path, self.catalog_path, self.graph_path, self.registry_path, *self.external_plans.values()]
        for p in paths:
            if p and not Path(p).exists():
                out.append(f"missing file {p}")
        if self.metrics.base_cost <= 0:
            out.append("base_cost must be positive")
        if self.metrics.alpha < 0:
            out.append("alpha must be nonnegative")
        if not 0 < self.metrics.damping < 1:
            out.append("damping must lie in (0, 1)")
        if self.metrics.similarity not in ("exact", "lexical", "embedding"):
            out.append(f"unknown similarity {self.metrics.similarity!r}")
        return out

    def validate(self) -> RunConfig:
        problems = self.problems()
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path | None = None) -> RunConfig:
        data = dict(data)
        try:
            sub = {
                "backend": BackendSettings,
                "judge": BackendSettings,
                "metrics": MetricSettings,
                "planners": PlannerSettings,
            }
            for key, klass in sub.items():
                if isinstance(data.get(key), dict):
                    known = {f.name for f in fields(klass)}
                    unknown = set(data[key]) - known
                    if unknown:
                        raise ConfigError(f"unknown {key} settings {sorted(unknown)}")
                    data[key] = klass(**data[key])
            known = {f.name for f in fields(cls)}
            unknown = set(data) - known
            if unknown:
                raise ConfigError(f"unknown config fields {sorted(unknown)}")
            config = cls(**data)
        except TypeError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        if base_dir is not None:
            base = Path(base_dir)

            def resolve(p: str) -> str:
                return str(base / p) if p and not Path(p).is_absolute() else p

            config.tasks_path = resolve(config.tasks_path)
            config.catalog_path = resolve(config.catalog_path)
            config.graph_path = resolve(config.graph_path)
            config.registry_path = resolve(config.registry_path)
            config.external_plans = {k: resolve(v) for k, v in config.external_plans.items()}
            for settings in (config.backend, config.judge):
                if settings is not None and settings.cache_path:
                    settings.cache_path = resolve(settings.cache_path)
        return config

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = tomllib.loads(raw.decode("utf-8")) if path.suffix == ".toml" else json.loads(raw)
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        return cls.from_dict(data, path.parent).validate()
