"""Access to bundled data files and prompt templates."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path


def data_path(name: str) -> Path:
    return Path(str(resources.files("htam") / "data" / name))


@lru_cache(maxsize=None)
def load_prompt(name: str) -> str:
    return (resources.files("htam") / "data" / "prompts" / f"{name}.txt").read_text(encoding="utf-8")


def render(name: str, **values) -> str:
    """Fill a prompt template.  Templates use ``str.format`` syntax."""
    return load_prompt(name).format(**values)


@lru_cache(maxsize=None)
def domain_data() -> dict:
    with open(data_path("domains.json"), encoding="utf-8") as fh:
        return json.load(fh)


def domains() -> list[str]:
    return list(domain_data()["domains"])


def complexities() -> list[str]:
    return list(domain_data()["complexities"])


def domain_descriptions() -> dict[str, str]:
    return dict(domain_data()["descriptions"])


def domain_keywords() -> dict[str, list[str]]:
    return {k: list(v) for k, v in domain_data()["keywords"].items()}
