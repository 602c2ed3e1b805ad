"""Slow, obviously-correct reference implementations used as test oracles."""

from __future__ import annotations

import itertools

import numpy as np


def longest_path_layers(nodes, edges) -> dict[str, int]:
    """Layer = number of nodes on the longest path ending at the node,
    found by exhaustive backward DFS."""
    preds = {n: [u for u, v in edges if v == n] for n in nodes}

    def longest_to(n) -> int:
        return 1 + max((longest_to(p) for p in preds[n]), default=0)

    return {n: longest_to(n) for n in nodes}


def all_source_sink_paths(nodes, edges) -> list[list[str]]:
    """Every ordering of distinct nodes that walks edges from a source to a
    sink, found by brute force over permutations."""
    edge_set = set(map(tuple, edges))
    has_in = {v for _, v in edge_set}
    has_out = {u for u, _ in edge_set}
    out = []
    for k in range(1, len(nodes) + 1):
        for perm in itertools.permutations(nodes, k):
            if perm[0] in has_in or perm[-1] in has_out:
                continue
            if all((a, b) in edge_set for a, b in zip(perm, perm[1:])):
                out.append(list(perm))
    return sorted(out)


def dense_pagerank(nodes, edges, damping=0.85) -> dict[str, float]:
    """Stationary vector of the Google matrix by eigendecomposition."""
    n = len(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    out = {v: [b for a, b in edges if a == v] for v in nodes}
    g = np.full((n, n), (1 - damping) / n)
    for u in nodes:
        if out[u]:
            for v in out[u]:
                g[idx[v], idx[u]] += damping / len(out[u])
        else:
            g[:, idx[u]] += damping / n
    vals, vecs = np.linalg.eig(g)
    vec = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
    vec = vec / vec.sum()
    return {v: float(vec[idx[v]]) for v in nodes}


def min_edit_script_cost(a, g, cost, sim) -> float:
    """Minimum over every edit script (all interleavings of delete, insert
    and substitute/match operations), enumerated without memoisation."""
    m, n = len(a), len(g)
    dele = [cost(t) for t in a]
    ins = [cost(t) for t in g]
    sub = [[0.0 if x == y else 1.0 - sim(x, y) for y in g] for x in a]
    best = float("inf")

    def go(i, j, acc):
        nonlocal best
        if i == m and j == n:
            if acc < best:
                best = acc
            return
        if i < m:
            go(i + 1, j, acc + dele[i])
            if j < n:
                go(i + 1, j + 1, acc + sub[i][j])
        if j < n:
            go(i, j + 1, acc + ins[j])

    go(0, 0, 0.0)
    return best


def levenshtein(s, t) -> int:
    """Textbook two-row Levenshtein distance with unit costs."""
    prev = list(range(len(t) + 1))
    for i, x in enumerate(s, 1):
        cur = [i]
        for j, y in enumerate(t, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def elo_replay(labels, battles, k=32.0, initial=1000.0) -> dict[str, float]:
    """Sequential hand replay: battles are (a, b, score_of_a)."""
    r = {lab: initial for lab in labels}
    for a, b, s in battles:
        ea = 1 / (1 + 10 ** ((r[b] - r[a]) / 400))
        eb = 1 / (1 + 10 ** ((r[a] - r[b]) / 400))
        r[a], r[b] = r[a] + k * (s - ea), r[b] + k * ((1 - s) - eb)
    return r
