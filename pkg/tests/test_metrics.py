from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass

import pytest

from htam.backends import HashingEmbedder, ScriptedBackend
from htam.centrality import CostModel, build_cost_model, compute_centrality
from htam.errors import BothEmpty, EmptyKeySet, JudgeProtocolError
from htam.metrics import (
    EmbeddingSimilarity,
    Judge,
    exact_similarity,
    extract_key_sets,
    f1,
    key_precision,
    key_recall,
    lexical_similarity,
    max_possible_cost,
    path_similarity,
    score_correctness,
    weighted_edit_distance,
)
from oracles import levenshtein, min_edit_script_cost

UNIFORM = CostModel.uniform()


class TestCorrectness:
    def test_worked_example(self):
        key_gt = {"a", "b", "c", "d"}
        agent = ["a", "b", "x"]
        assert key_recall(key_gt, agent) == 0.5
        assert key_precision({"a", "x"}, ["a", "b", "c", "d"]) == 0.5
        assert f1(0.5, 0.5) == 0.5

    def test_duplicates_ignored(self):
        assert key_recall({"a", "b"}, ["a", "a", "a"]) == 0.5

    def test_empty_key_gt_rejected(self):
        with pytest.raises(EmptyKeySet):
            key_recall(set(), ["a"])

    def test_empty_key_agent_flagged(self):
        s = score_correctness({"a"}, set(), [], ["a"])
        assert (s.recall, s.precision, s.f1) == (0.0, 0.0, 0.0)
        assert s.flags == ("empty_key",)

    def test_exhaustive_four_tool_universe(self):
        universe = "abcd"
        subsets = [set(c) for k in range(5) for c in itertools.combinations(universe, k)]
        checked = 0
        for x, y in itertools.product(subsets, subsets):
            checked += 1
            if x:
                assert key_recall(x, sorted(y)) == len(x & y) / len(x)
            assert key_precision(x, sorted(y)) == (len(x & y) / len(x) if x else 0.0)
        assert checked == 256


def random_cost_model(rng: random.Random, alphabet: str) -> CostModel:
    return CostModel(base_cost=1.0, ins_del_cost={t: rng.uniform(0.5, 3.0) for t in alphabet})


def table_sim(rng: random.Random, alphabet: str):
    table = {}
    for a, b in itertools.combinations(alphabet, 2):
        table[(a, b)] = table[(b, a)] = rng.random()
    return lambda x, y: 1.0 if x == y else table[(x, y)]


class TestEditDistance:
    def test_matches_exhaustive_scripts(self):
        rng = random.Random(7)
        seqs = [list(s) for n in range(4) for s in itertools.product("abc", repeat=n)]
        for _ in range(2):
            cm, sim = random_cost_model(rng, "abc"), table_sim(rng, "abc")
            for a, g in itertools.product(seqs[::3], seqs[::3]):
                assert weighted_edit_distance(a, g, cm, sim) == pytest.approx(min_edit_script_cost(a, g, cm.cost, sim), abs=1e-9)

    def test_uniform_exact_is_levenshtein(self):
        rng = random.Random(3)
        for _ in range(200):
            a = [rng.choice("abcde") for _ in range(rng.randint(0, 8))]
            g = [rng.choice("abcde") for _ in range(rng.randint(0, 8))]
            assert weighted_edit_distance(a, g, UNIFORM) == levenshtein(a, g)

    def test_one_substitution(self):
        assert path_similarity(["a", "b", "c"], ["a", "x", "c"], UNIFORM) == pytest.approx(1 - 1 / 6)

    def test_disjoint_equal_length(self):
        assert path_similarity(["a", "b"], ["x", "y"], UNIFORM) == pytest.approx(0.5)

    def test_identical(self):
        assert path_similarity(["a", "b"], ["a", "b"], UNIFORM) == 1.0

    def test_one_empty(self):
        assert path_similarity([], ["a", "b"], UNIFORM) == 0.0

    def test_both_empty(self):
        with pytest.raises(BothEmpty):
            path_similarity([], [], UNIFORM)

    def test_max_cost_floor(self):
        cm = CostModel(base_cost=2.0, ins_del_cost={"a": 0.5})
        assert max_possible_cost(["a"], [], cm) == 2.0

    def test_costlier_tool_hurts_more_when_dropped(self, load_graph):
        cm = build_cost_model(compute_centrality(load_graph("graph_8")))
        gt = ["download_satellite_imagery", "geometric_correction", "detect_buildings", "statistical_analysis", "generate_analysis_reports"]
        hi = max(gt, key=cm.cost)
        lo = min(gt, key=cm.cost)
        assert cm.cost(hi) > cm.cost(lo)
        sim_hi = path_similarity([t for t in gt if t != hi], gt, cm)
        sim_lo = path_similarity([t for t in gt if t != lo], gt, cm)
        assert sim_hi < sim_lo


class TestSimilarityProviders:
    def test_exact(self):
        assert exact_similarity("a", "a") == 1.0 and exact_similarity("a", "b") == 0.0

    def test_lexical_partial_overlap(self):
        assert lexical_similarity("detect_ships", "detect_buildings") == pytest.approx(1 / 3)

    def test_soft_substitution_cheaper(self):
        d_soft = weighted_edit_distance(["detect_ships"], ["detect_buildings"], UNIFORM, lexical_similarity)
        d_hard = weighted_edit_distance(["detect_ships"], ["detect_buildings"], UNIFORM)
        assert d_soft == pytest.approx(2 / 3) and d_hard == 1.0

    def test_embedding_similarity_bounds(self):
        sim = EmbeddingSimilarity(HashingEmbedder(), {"a_b": "alpha beta", "c_d": "gamma delta"})
        assert sim("a_b", "a_b") == 1.0
        assert 0.0 <= sim("a_b", "c_d") <= 1.0


@dataclass
class FakeTask:
    task_id: str
    question: str
    ground_truth: list[str]


def key_backend(steps: str, tools: str) -> ScriptedBackend:
    return ScriptedBackend([("Ground truth tool path", steps), ("Agent's tool path", tools)])


class TestKeySets:
    task = FakeTask("t1", "Map the flood.", ["download_satellite_imagery", "monitor_flood_extent", "format_data"])

    def test_mock_judge_dedups(self):
        judge = Judge(key_backend('{"key_steps": ["monitor_flood_extent", "monitor_flood_extent"]}', '{"key_tools": ["monitor_flood_extent"]}'))
        keys = extract_key_sets(judge, self.task, ["monitor_flood_extent", "web_search"])
        assert keys.key_gt == {"monitor_flood_extent"}
        assert keys.key_agent == {"monitor_flood_extent"}
        assert keys.flags == ()

    def test_invented_tools_dropped(self):
        judge = Judge(key_backend('{"key_steps": ["monitor_flood_extent", "teleport"]}', '{"key_tools": ["web_search"]}'))
        keys = extract_key_sets(judge, self.task, ["web_search"])
        assert keys.key_gt == {"monitor_flood_extent"}

    def test_empty_retried_then_falls_back(self):
        backend = key_backend('{"key_steps": []}', '{"key_tools": ["web_search"]}')
        keys = extract_key_sets(Judge(backend), self.task, ["web_search"])
        assert keys.key_gt == set(self.task.ground_truth)
        assert keys.flags == ("key_steps_fallback",)
        assert backend.call_count == 3

    def test_empty_agent_path_needs_no_call(self):
        backend = key_backend('{"key_steps": ["format_data"]}', "unused")
        keys = extract_key_sets(Judge(backend), self.task, [])
        assert keys.key_agent == frozenset()
        assert backend.call_count == 1

    def test_cached_per_path(self):
        backend = key_backend('{"key_steps": ["format_data"]}', '{"key_tools": ["web_search"]}')
        judge = Judge(backend)
        extract_key_sets(judge, self.task, ["web_search"])
        extract_key_sets(judge, self.task, ["web_search"])
        assert backend.call_count == 2
        extract_key_sets(judge, self.task, ["web_search", "format_data"])
        assert backend.call_count == 3

    def test_prose_is_protocol_error(self):
        judge = Judge(key_backend("The key step is flooding.", "x"))
        with pytest.raises(JudgeProtocolError):
            extract_key_sets(judge, self.task, ["web_search"])

    def test_verdict_normalized(self):
        judge = Judge(ScriptedBackend(default=" 'a'. "))
        assert judge.verdict("q", "x", ["a"], "y", ["b"]) == "A"

    def test_flow_is_json_list(self):
        backend = key_backend('{"key_steps": ["format_data"]}', "x")
        extract_key_sets(Judge(backend), self.task, [])
        assert json.dumps(self.task.ground_truth) in backend.prompts[0]
