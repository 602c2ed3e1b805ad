"""Completion request/response types shared by every backend."""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from typing import Protocol

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[Message, ...]
    temperature: float = 0.0
    max_tokens: int = 1024
    model: str = ""

    def __post_init__(self):
        if not self.messages:
            raise ValueError("a request needs at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        object.__setattr__(self, "messages", tuple(self.messages))

    @classmethod
    def from_prompt(cls, prompt: str, system: str | None = None, **params) -> CompletionRequest:
        msgs = [Message("system", system)] if system else []
        msgs.append(Message("user", prompt))
        return cls(tuple(msgs), **params)

    @property
    def prompt(self) -> str:
        """All message contents joined, the text scripted matchers see."""
        return "\n".join(m.content for m in self.messages)

    def body(self) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }

    def cache_key(self) -> str:
        blob = json.dumps(self.body(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    total_tokens: int = 0

    @classmethod
    def from_body(cls, body: dict | None) -> Usage:
        body = body or {}
        p = int(body.get("prompt_tokens") or 0)
        c = int(body.get("completion_tokens") or 0)
        return cls(p, c, int(body.get("total_tokens") or p + c))


@dataclass(frozen=True)
class Completion:
    text: str
    usage: Usage = field(default_factory=Usage)
    cached: bool = False


class CompletionBackend(Protocol):
    def complete(self, request: CompletionRequest) -> Completion: ...


class UsageMeter:
    """Thread-safe running totals of calls and token usage."""

    def __init__(self):
        self._lock = threading.Lock()
        self.calls = 0
        self.cached_calls = 0
        self.prompt_tokens = 0
        self.completion_tokens = 0

    def record(self, completion: Completion) -> None:
        with self._lock:
            self.calls += 1
            self.cached_calls += int(completion.cached)
            self.prompt_tokens += completion.usage.prompt_tokens
            self.completion_tokens += completion.usage.completion_tokens

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "calls": self.calls,
                "cached_calls": self.cached_calls,
                "prompt_tokens": self.prompt_tokens,
                "completion_tokens": self.completion_tokens,
                "total_tokens": self.prompt_tokens + self.completion_tokens,
            }


@dataclass(frozen=True)
class Decoding:
    temperature: float = 0.0
    max_tokens: int = 1024
    model: str = ""


def ask(backend: CompletionBackend, prompt: str, decoding: Decoding | None = None, meter: UsageMeter | None = None) -> str:
    """Send one user prompt and return the completion text."""
    d = decoding or Decoding()
    req = CompletionRequest.from_prompt(prompt, temperature=d.temperature, max_tokens=d.max_tokens, model=d.model)
    completion = backend.complete(req)
    if meter is not None:
        meter.record(completion)
    return completion.text
