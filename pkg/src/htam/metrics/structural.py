"""Centrality-weighted edit distance between tool sequences and the
path-similarity score derived from it."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Protocol

import numpy as np

from ..backends.embedding import EmbeddingProvider
from ..centrality import CostModel
from ..errors import BothEmpty


class SimilarityProvider(Protocol):
    def __call__(self, tool_a: str, tool_b: str) -> float: ...


def exact_similarity(tool_a: str, tool_b: str) -> float:
    return 1.0 if tool_a == tool_b else 0.0


def lexical_similarity(tool_a: str, tool_b: str) -> float:
    """1 for equal names, else Jaccard overlap of underscore-separated tokens."""
    if tool_a == tool_b:
        return 1.0
    ta = {t for t in tool_a.lower().split("_") if t}
    tb = {t for t in tool_b.lower().split("_") if t}
    union = ta | tb
    return len(ta & tb) / len(union) if union else 0.0


class EmbeddingSimilarity:
    """Cosine similarity of tool embeddings, clamped to [0, 1].

    Each tool is embedded from its name plus its catalog description when
    one is available.  Vectors are cached per tool name.
    """

    def __init__(self, embedder: EmbeddingProvider, descriptions: dict[str, str] | None = None):
        self.embedder = embedder
        self.descriptions = descriptions or {}
        self._vectors: dict[str, np.ndarray] = {}

    def _text(self, tool: str) -> str:
        desc = self.descriptions.get(tool, "")
        return f"{tool.replace('_', ' ')}: {desc}" if desc else tool.replace("_", " ")

    def prime(self, tools: Sequence[str]) -> None:
        missing = sorted({t for t in tools if t not in self._vectors})
        if missing:
            for tool, vec in zip(missing, self.embedder.embed([self._text(t) for t in missing])):
                self._vectors[tool] = vec

    def __call__(self, tool_a: str, tool_b: str) -> float:
        if tool_a == tool_b:
            return 1.0
        self.prime([tool_a, tool_b])
        return float(min(1.0, max(0.0, np.dot(self._vectors[tool_a], self._vectors[tool_b]))))


def _tools(seq) -> list[str]:
    return list(getattr(seq, "tools", seq))


def weighted_edit_distance(agent, gt, cost_model: CostModel, sim: SimilarityProvider = exact_similarity) -> float:
    """Levenshtein DP with per-tool insertion/deletion costs and
    ``1 - similarity`` substitution cost."""
    a, g = _tools(agent), _tools(gt)
    m, n = len(a), len(g)
    dele = [cost_model.cost_del(t) for t in a]
    ins = [cost_model.cost_ins(t) for t in g]
    prev = [0.0] * (n + 1)
    for j in range(1, n + 1):
        prev[j] = prev[j - 1] + ins[j - 1]
    for i in range(1, m + 1):
        cur = [prev[0] + dele[i - 1]] + [0.0] * n
        for j in range(1, n + 1):
            sub = 0.0 if a[i - 1] == g[j - 1] else 1.0 - sim(a[i - 1], g[j - 1])
            cur[j] = min(prev[j] + dele[i - 1], cur[j - 1] + ins[j - 1], prev[j - 1] + sub)
        prev = cur
    return prev[n]


def max_possible_cost(agent, gt, cost_model: CostModel) -> float:
    """Cost of deleting every agent step and inserting every ground-truth
    step, floored at ``base_cost``."""
    total = sum(cost_model.cost_del(t) for t in _tools(agent)) + sum(cost_model.cost_ins(t) for t in _tools(gt))
    return max(total, cost_model.base_cost)


def path_similarity(agent, gt, cost_model: CostModel, sim: SimilarityProvider = exact_similarity) -> float:
    a, g = _tools(agent), _tools(gt)
    if not a and not g:
        raise BothEmpty("both paths are empty")
    d = weighted_edit_distance(a, g, cost_model, sim)
    if d == 0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - d / max_possible_cost(a, g, cost_model)))
