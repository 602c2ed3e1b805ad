from __future__ import annotations

import pytest

from htam.errors import NoListFound
from htam.parsing import extract_json, parse_tool_list


def test_python_style_list():
    assert parse_tool_list("['a','b']").tools == ["a", "b"]


def test_json_with_trailing_prose():
    out = parse_tool_list('Here you go: ["a", "b"]\nHope this helps!')
    assert out.tools == ["a", "b"]


def test_pure_prose_raises():
    with pytest.raises(NoListFound):
        parse_tool_list("I would first download the imagery and then analyze it.")


def test_fenced_block_wins():
    text = 'Example: ["x"]\n```json\n{"tools": ["a", "b"]}\n```'
    assert parse_tool_list(text).tools == ["a", "b"]


def test_object_key_preference():
    text = '{"plan": "some words", "initial_tool_trajectory": ["a", "c"]}'
    assert parse_tool_list(text).tools == ["a", "c"]
    assert parse_tool_list(text, key="initial_tool_trajectory").tools == ["a", "c"]


def test_catalog_split_keeps_order_and_duplicates():
    out = parse_tool_list('["a", "zz", "b", "a"]', catalog={"a", "b"})
    assert out.tools == ["a", "b", "a"]
    assert out.rejects == ["zz"]


def test_normalizes_quotes_and_whitespace():
    out = parse_tool_list("[“ a ”, ' `b` ']")
    assert out.tools == ["a", "b"]


def test_list_of_step_objects():
    out = parse_tool_list('{"plan": [{"tool": "a", "parameters": {}}, {"tool": "b"}]}')
    assert out.tools == ["a", "b"]


def test_line_regex_fallback():
    out = parse_tool_list("Tools to use:\n1. download_satellite_imagery\n2. classify_land_cover\n")
    assert out.tools == ["download_satellite_imagery", "classify_land_cover"]


def test_trailing_commas_tolerated():
    text = '{"plan": [{"tool": "a", "parameters": {"x": 1},},]}'
    assert extract_json(text) == {"plan": [{"tool": "a", "parameters": {"x": 1}}]}


def test_brackets_inside_strings_do_not_confuse_scan():
    assert extract_json('note {"a": "has ] and }", "b": [1]} tail') == {"a": "has ] and }", "b": [1]}


def test_deterministic():
    text = 'x ```\n["b", "a"]\n``` y'
    assert parse_tool_list(text) == parse_tool_list(text)
