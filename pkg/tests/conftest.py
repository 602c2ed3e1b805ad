from __future__ import annotations

import random
from pathlib import Path

import pytest

from htam.graph import DependencyGraph, ToolCatalog

FIXTURES = Path(__file__).parent / "fixtures"


def random_dag(rng: random.Random, n: int, p: float = 0.3) -> DependencyGraph:
    """Edges only go from lower to higher index under a random relabelling,
    so the result is acyclic by construction."""
    names = [f"t{i:02d}" for i in range(n)]
    rng.shuffle(names)
    edges = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return DependencyGraph(sorted(names), edges)


@pytest.fixture(scope="session")
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def catalog() -> ToolCatalog:
    return ToolCatalog.bundled()


@pytest.fixture
def load_graph():
    return lambda name: DependencyGraph.load(FIXTURES / f"{name}.json")


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
