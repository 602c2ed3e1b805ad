from __future__ import annotations

import itertools
import random

import pytest

from htam.errors import JudgeProtocolError
from htam.metrics import EloState, apply_verdicts, battle_order, elo_expected, elo_update, normalize_verdict, run_tournament
from oracles import elo_replay

E_200 = 0.7597469266479578  # 1 / (1 + 10 ** -0.5)


def test_expected_at_200():
    assert elo_expected(1100, 900)[0] == pytest.approx(E_200, abs=1e-15)
    assert sum(elo_expected(1234, 987)) == pytest.approx(1.0)


def test_first_win_from_equal_ratings():
    assert elo_update(1000, 1000, 1.0) == (1016.0, 984.0)


def test_draw_between_equals_is_neutral():
    assert elo_update(1000, 1000, 0.5) == (1000.0, 1000.0)


def test_favourite_wins():
    ra, rb = elo_update(1100, 900, 1.0)
    assert ra == pytest.approx(1100 + 32 * (1 - E_200))
    assert rb == pytest.approx(900 - 32 * (1 - E_200))


def test_bad_score():
    with pytest.raises(ValueError):
        elo_update(1000, 1000, 0.3)


@pytest.mark.parametrize("raw,expected", [("A", "A"), (" b ", "B"), ("tie", "Tie"), ("'TIE'.", "Tie")])
def test_normalize(raw, expected):
    assert normalize_verdict(raw) == expected


def test_normalize_rejects_prose():
    with pytest.raises(JudgeProtocolError):
        normalize_verdict("Agent A is more complete")


def test_battle_order_is_lexicographic():
    order = battle_order(["t1", "t2"], ["zeta", "alpha", "mid"])
    assert order[:3] == [("t1", "alpha", "mid"), ("t1", "alpha", "zeta"), ("t1", "mid", "zeta")]
    assert len(order) == 6
    shuffled = battle_order(["t1", "t2"], ["c", "a", "b"], order_seed=5)
    assert sorted(shuffled) == sorted(battle_order(["t1", "t2"], ["a", "b", "c"]))
    assert shuffled == battle_order(["t1", "t2"], ["c", "a", "b"], order_seed=5)


def test_all_ties_leave_equal_ratings_unchanged():
    rows = [(f"t{i}", a, b, "Tie") for i in range(10) for a, b in itertools.combinations("abc", 2)]
    state = apply_verdicts("abc", rows)
    assert state.ratings == {"a": 1000.0, "b": 1000.0, "c": 1000.0}


def test_three_agent_tournament_against_replay():
    rng = random.Random(11)
    labels = ["aflow", "earthagent", "react"]
    rows = [(f"t{i}", a, b, rng.choice(["A", "B", "Tie"])) for i in range(50) for a, b in itertools.combinations(labels, 2)]
    state = apply_verdicts(labels, rows)
    running = EloState.start(labels)
    for task_id, a, b, v in rows:
        running.play(task_id, a, b, v)
        assert abs(sum(running.ratings.values()) - 3000.0) < 1e-9
    expected = elo_replay(labels, [(a, b, {"A": 1.0, "B": 0.0, "Tie": 0.5}[v]) for _, a, b, v in rows], 32.0, 1000.0)
    assert state.ratings == expected


def test_skipped_verdicts_are_logged_not_scored():
    state = apply_verdicts("ab", [("t1", "a", "b", "A"), ("t2", "a", "b", "maybe")])
    assert len(state.history) == 1
    assert state.skipped == [("t2", "a", "b", "maybe")]


def test_run_tournament_with_judge():
    plans = {"long": {"t1": ["x", "y"], "t2": ["x", "y"]}, "short": {"t1": ["x"], "t2": ["x"]}}

    def judge(task, a, pa, b, pb):
        if task == "t2":
            raise JudgeProtocolError("boom")
        return "A" if len(pa) > len(pb) else "B"

    state = run_tournament(plans, ["t1", "t2"], judge)
    assert state.ratings == {"long": 1016.0, "short": 984.0}
    assert len(state.skipped) == 1
