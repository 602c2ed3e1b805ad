"""Elo ratings from pairwise completeness verdicts."""

from __future__ import annotations

import itertools
import logging
import random
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from ..errors import JudgeProtocolError

log = logging.getLogger(__name__)

SCORES = {"A": 1.0, "B": 0.0, "Tie": 0.5}


def elo_expected(r_a: float, r_b: float) -> tuple[float, float]:
    e_a = 1.0 / (1.0 + 10.0 ** ((r_b - r_a) / 400.0))
    e_b = 1.0 / (1.0 + 10.0 ** ((r_a - r_b) / 400.0))
    return e_a, e_b


def elo_update(r_a: float, r_b: float, s_a: float, k: float = 32.0) -> tuple[float, float]:
    if s_a not in (0.0, 0.5, 1.0):
        raise ValueError(f"score must be 0, 0.5 or 1, got {s_a}")
    e_a, e_b = elo_expected(r_a, r_b)
    return r_a + k * (s_a - e_a), r_b + k * ((1.0 - s_a) - e_b)


def normalize_verdict(text: str) -> str:
    """Map judge output to ``"A"``, ``"B"`` or ``"Tie"``."""
    token = (text or "").strip().strip("\"'`*. ").strip().casefold()
    for verdict in SCORES:
        if token == verdict.casefold():
            return verdict
    raise JudgeProtocolError(f"unrecognized verdict {text!r}")


@dataclass(frozen=True)
class Battle:
    task_id: str
    a: str
    b: str
    verdict: str
    r_a_after: float
    r_b_after: float

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "a": self.a,
            "b": self.b,
            "verdict": self.verdict,
            "r_a_after": self.r_a_after,
            "r_b_after": self.r_b_after,
        }


@dataclass
class EloState:
    ratings: dict[str, float]
    k_factor: float = 32.0
    initial_rating: float = 1000.0
    history: list[Battle] = field(default_factory=list)
    skipped: list[tuple[str, str, str, str]] = field(default_factory=list)

    @classmethod
    def start(cls, labels: Iterable[str], k_factor: float = 32.0, initial_rating: float = 1000.0) -> EloState:
        return cls({lab: float(initial_rating) for lab in labels}, k_factor, initial_rating)

    def play(self, task_id: str, a: str, b: str, verdict: str) -> Battle:
        ra, rb = elo_update(self.ratings[a], self.ratings[b], SCORES[verdict], self.k_factor)
        self.ratings[a], self.ratings[b] = ra, rb
        battle = Battle(task_id, a, b, verdict, ra, rb)
        self.history.append(battle)
        return battle


def battle_order(task_ids: Sequence[str], labels: Iterable[str], order_seed: int | None = None) -> list[tuple[str, str, str]]:
    """Tasks in the given order, label pairs lexicographic; optionally shuffled
    with a seeded RNG."""
    pairs = list(itertools.combinations(sorted(labels), 2))
    order = [(t, a, b) for t in task_ids for a, b in pairs]
    if order_seed is not None:
        random.Random(order_seed).shuffle(order)
    return order


def apply_verdicts(
    labels: Iterable[str],
    verdicts: Iterable[tuple[str, str, str, str]],
    k: float = 32.0,
    initial: float = 1000.0,
) -> EloState:
    """Replay ``(task_id, a, b, raw_verdict)`` rows in order; rows whose
    verdict does not normalize are skipped and logged."""
    state = EloState.start(labels, k, initial)
    for task_id, a, b, raw in verdicts:
        try:
            verdict = normalize_verdict(raw)
        except JudgeProtocolError:
            log.warning("skipping battle %s %s vs %s: verdict %r", task_id, a, b, raw)
            state.skipped.append((task_id, a, b, raw))
            continue
        state.play(task_id, a, b, verdict)
    return state


Judge = Callable[[object, str, list, str, list], str]


def _task_id(task) -> str:
    return str(getattr(task, "task_id", task))


def run_tournament(
    plans: Mapping[str, Mapping[str, object]],
    tasks: Sequence,
    judge: Judge,
    k: float = 32.0,
    initial: float = 1000.0,
    order_seed: int | None = None,
) -> EloState:
    """``plans[label][task_id]`` is a plan or tool list; ``judge(task, a, plan_a,
    b, plan_b)`` returns a raw verdict string.  A judge that raises
    :class:`JudgeProtocolError` skips that battle."""
    by_id = {_task_id(t): t for t in tasks}
    rows = []
    for task_id, a, b in battle_order(list(by_id), plans, order_seed):
        try:
            raw = judge(by_id[task_id], a, plans[a][task_id], b, plans[b][task_id])
        except JudgeProtocolError as exc:
            raw = f"<error: {exc}>"
        rows.append((task_id, a, b, raw))
    return apply_verdicts(sorted(plans), rows, k, initial)
