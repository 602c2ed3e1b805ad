"""Salvage structured values out of free-form model output.

Models wrap JSON in code fences, trail it with prose, emit Python-style
lists, or leave trailing commas.  Everything funnels through
:func:`extract_json` and :func:`parse_tool_list`.
"""

from __future__ import annotations

import ast
import json
import re
from collections.abc import Container, Sequence
from dataclasses import dataclass, field
from typing import Any

from .errors import NoListFound

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n?(.*?)```", re.DOTALL)
_TRAILING_COMMA = re.compile(r",\s*([}\]])")
_SMART_QUOTES = str.maketrans({"“": '"', "”": '"', "‘": "'", "’": "'"})
_LINE_ITEM = re.compile(r"^\s*(?:[-*•]|\d+[.)]|step\s*\d+\s*[:.)])\s*`?([A-Za-z_][A-Za-z0-9_]*)`?\s*(?:\(.*\))?\s*$", re.IGNORECASE)

# keys tried, in order, when a JSON object wraps the tool list
LIST_KEYS = (
    "final_tool_trajectory",
    "refined_tool_trajectory",
    "initial_tool_trajectory",
    "tool_trajectory",
    "key_tools",
    "key_steps",
    "tools",
    "plan",
    "selected_agents",
)

_NOTHING = object()


def _loads(text: str) -> Any:
    """json.loads, then the same with trailing commas removed, then a
    Python literal.  Returns ``_NOTHING`` on failure."""
    for candidate in (text, _TRAILING_COMMA.sub(r"\1", text)):
        try:
            return json.loads(candidate)
        except ValueError:
            pass
    try:
        value = ast.literal_eval(text)
    except (ValueError, SyntaxError, MemoryError, RecursionError):
        return _NOTHING
    return value if isinstance(value, (list, dict, tuple)) else _NOTHING


def _balanced_spans(text: str, opener: str):
    """Yield substrings starting at each ``opener`` up to its balanced close,
    honouring quoted strings."""
    closer = {"{": "}", "[": "]"}[opener]
    start = text.find(opener)
    while start != -1:
        depth, quote, escaped = 0, None, False
        for i in range(start, len(text)):
            ch = text[i]
            if quote:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == quote:
                    quote = None
                continue
            if ch in "\"'":
                quote = ch
            elif ch in "{[":
                depth += 1
            elif ch in "}]":
                depth -= 1
                if depth == 0:
                    if ch == closer:
                        yield text[start : i + 1]
                    break
        start = text.find(opener, start + 1)


def _first_value(text: str) -> Any:
    # earliest opening bracket of either kind wins
    starts = sorted((i, ch) for ch in "{[" if (i := text.find(ch)) != -1)
    for _, ch in starts:
        for span in _balanced_spans(text, ch):
            value = _loads(span)
            if value is not _NOTHING:
                return value
    return _NOTHING


def extract_json(text: str) -> Any:
    """Return the first JSON (or Python-literal) object or array in ``text``.

    Raises :class:`NoListFound` when nothing parses.
    """
    text = (text or "").translate(_SMART_QUOTES)
    for block in _FENCE.findall(text):
        value = _loads(block.strip())
        if value is _NOTHING:
            value = _first_value(block)
        if value is not _NOTHING:
            return value
    value = _loads(text.strip())
    if value is not _NOTHING:
        return value
    value = _first_value(text)
    if value is not _NOTHING:
        return value
    raise NoListFound("no JSON value found in model output")


def _normalize_name(item: Any) -> str:
    if isinstance(item, dict):
        for key in ("tool", "name", "tool_name", "function"):
            if isinstance(item.get(key), str):
                item = item[key]
                break
        else:
            return ""
    return str(item).strip().strip("`'\" ").strip()


def _pick_list(value: Any, key: str | None) -> list | None:
    if isinstance(value, (list, tuple)):
        return list(value)
    if not isinstance(value, dict):
        return None
    keys = (key,) if key else LIST_KEYS
    for k in keys:
        if isinstance(value.get(k), (list, tuple)):
            return list(value[k])
    if key is None:
        for v in value.values():
            if isinstance(v, (list, tuple)):
                return list(v)
    return None


@dataclass(frozen=True)
class ToolList:
    tools: list[str] = field(default_factory=list)
    rejects: list[str] = field(default_factory=list)


def _line_items(text: str) -> list[str]:
    return [m.group(1) for line in text.splitlines() if (m := _LINE_ITEM.match(line))]


def parse_tool_list(raw_text: str, catalog: Container[str] | None = None, key: str | None = None) -> ToolList:
    """Ordered tool names from model output, split into catalog hits and rejects.

    Salvage order: fenced block, first JSON value, bracketed Python-style
    list, then bulleted/numbered lines.  Duplicates are kept.  With no
    catalog every name is accepted.
    """
    items: list | None = None
    try:
        items = _pick_list(extract_json(raw_text), key)
    except NoListFound:
        items = None
    if items is None:
        items = _line_items((raw_text or "").translate(_SMART_QUOTES)) or None
    if items is None:
        raise NoListFound("no tool list found in model output")
    tools, rejects = [], []
    for item in items:
        name = _normalize_name(item)
        if not name:
            continue
        if catalog is None or name in catalog:
            tools.append(name)
        else:
            rejects.append(name)
    return ToolList(tools, rejects)


def split_known(names: Sequence[str], catalog: Container[str]) -> ToolList:
    tools = [n for n in names if n in catalog]
    return ToolList(tools, [n for n in names if n not in catalog])
