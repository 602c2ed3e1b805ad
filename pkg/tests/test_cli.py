from __future__ import annotations

import json

from htam.cli import main


def test_plan_prints_tools(capsys):
    assert main(["plan", "Quantify coastal erosion along the Outer Banks shoreline.", "--arch", "htam"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[:2] == ["recommend_satellite_platforms", "download_satellite_imagery"]


def test_plan_json_trace(capsys):
    assert main(["plan", "Map flood extent in Dhaka.", "--arch", "debate", "--free-rounds", "0", "--json", "--trace"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["trace"]) == 4


def test_eval_writes_outputs(fixtures, tmp_path, capsys):
    assert main(["eval", str(fixtures / "eval_external.toml"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "report.json").exists() and (tmp_path / "summary.md").exists()
    assert (tmp_path / "csv" / "per_task.csv").exists()
    assert "Holistic" in capsys.readouterr().out


def test_eval_bad_config_exit_2(tmp_path, fixtures):
    bad = tmp_path / "bad.toml"
    bad.write_text(f'tasks_path = "{fixtures / "sample_tasks.jsonl"}"\narchitectures = ["nonsense"]\n')
    assert main(["eval", str(bad), "--out", str(tmp_path / "out")]) == 2


def test_eval_partial_failure_exit_3(tmp_path, fixtures):
    plans = json.loads((fixtures / "plans_aflow.json").read_text())
    plans.pop(next(iter(plans)))
    (tmp_path / "p.json").write_text(json.dumps(plans))
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        f'tasks_path = "{fixtures / "sample_tasks.jsonl"}"\narchitectures = ["a", "b"]\n'
        f'[external_plans]\na = "{tmp_path / "p.json"}"\nb = "{fixtures / "plans_earthagent.json"}"\n'
    )
    assert main(["eval", str(cfg), "--out", str(tmp_path / "out"), "--formats", "json"]) == 3


def test_score(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("download_satellite_imagery\nclassify_land_cover\n")
    (tmp_path / "g.json").write_text('["download_satellite_imagery", "cloud_mask_removal", "classify_land_cover"]')
    assert main(["score", str(tmp_path / "a.txt"), str(tmp_path / "g.json"), "--uniform"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["path_similarity"] == 1 - 1 / 5
    assert record["recall_key"] > 0


def test_report_regroup(fixtures, tmp_path, capsys):
    main(["eval", str(fixtures / "eval_external.toml"), "--out", str(tmp_path), "--formats", "json"])
    capsys.readouterr()
    assert main(["report", str(tmp_path / "report.json"), "--group-by", "complexity", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert {r["group"] for r in rows} == {"Simple", "Medium", "Complex"}


def test_bench_gen(tmp_path, capsys):
    out = tmp_path / "tasks.jsonl"
    code = main(["bench", "gen", "--out", str(out), "--domains", "Urban & Regional Planning", "--complexities", "Simple", "--report", str(tmp_path / "r.json")])
    assert code == 0
    counts = json.loads(capsys.readouterr().out)
    assert counts["retained"] == len(out.read_text().splitlines())


def test_bench_gen_unknown_domain(tmp_path):
    assert main(["bench", "gen", "--out", str(tmp_path / "x.jsonl"), "--domains", "Astrology"]) == 2


def test_missing_report_is_error(tmp_path):
    assert main(["report", str(tmp_path / "nope.json")]) == 1
