"""Deterministic prompt-to-response mock."""

from __future__ import annotations

import re
import threading
from collections.abc import Callable, Iterable
from typing import Union

from .base import Completion, CompletionRequest

Matcher = Union[str, re.Pattern, Callable[[str], bool]]
Response = Union[str, Callable[[str], str]]


def _matches(matcher: Matcher, prompt: str) -> bool:
    if isinstance(matcher, str):
        return matcher in prompt
    if isinstance(matcher, re.Pattern):
        return matcher.search(prompt) is not None
    return bool(matcher(prompt))


class ScriptedBackend:
    """First matching rule wins; unmatched prompts get ``default``.

    A matcher is a substring, a compiled regex, or a predicate over the
    prompt text.  A response is a string or a function of the prompt, so
    the backend is always a pure function of its input.
    """

    def __init__(self, rules: Iterable[tuple[Matcher, Response]] = (), default: Response = ""):
        self.rules = list(rules)
        self.default = default
        self.prompts: list[str] = []
        self._lock = threading.Lock()

    def respond(self, prompt: str) -> str:
        for matcher, response in self.rules:
            if _matches(matcher, prompt):
                return response(prompt) if callable(response) else response
        return self.default(prompt) if callable(self.default) else self.default

    def complete(self, request: CompletionRequest) -> Completion:
        prompt = request.prompt
        with self._lock:
            self.prompts.append(prompt)
        return Completion(self.respond(prompt))

    @property
    def call_count(self) -> int:
        return len(self.prompts)
