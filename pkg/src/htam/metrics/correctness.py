"""Key-tool recall, precision and F1.  Paths are reduced to sets first."""

from __future__ import annotations

from collections.abc import Iterable, Set
from dataclasses import dataclass, field

from ..errors import EmptyKeySet


def _tool_set(path) -> set[str]:
    tools = getattr(path, "tools", path)
    return set(tools)


def key_recall(key_gt: Set[str], agent_path: Iterable[str]) -> float:
    if not key_gt:
        raise EmptyKeySet("ground-truth key set is empty")
    return len(set(key_gt) & _tool_set(agent_path)) / len(key_gt)


def key_precision(key_agent: Set[str], gt_path: Iterable[str]) -> float:
    """Zero for an empty ``key_agent``; callers flag that case."""
    if not key_agent:
        return 0.0
    return len(set(key_agent) & _tool_set(gt_path)) / len(key_agent)


def f1(recall: float, precision: float) -> float:
    total = recall + precision
    return 0.0 if total == 0 else 2 * recall * precision / total


@dataclass(frozen=True)
class CorrectnessScores:
    recall: float
    precision: float
    f1: float
    flags: tuple[str, ...] = field(default=())


def score_correctness(key_gt: Set[str], key_agent: Set[str], agent_path, gt_path) -> CorrectnessScores:
    r = key_recall(key_gt, agent_path)
    p = key_precision(key_agent, gt_path)
    flags = () if key_agent else ("empty_key",)
    return CorrectnessScores(r, p, f1(r, p), flags)
