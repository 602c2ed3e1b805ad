from __future__ import annotations

import json
import re
import threading

import httpx
import numpy as np
import pytest

from htam.backends import (
    CachedBackend,
    CompletionRequest,
    HashingEmbedder,
    HttpBackend,
    HttpEmbedder,
    Message,
    ScriptedBackend,
    UsageMeter,
    ask,
)
from htam.errors import ProtocolError, ProviderFailure, RateLimited, TransportError


def req(text: str, **kw) -> CompletionRequest:
    return CompletionRequest.from_prompt(text, **kw)


class TestRequest:
    def test_needs_a_message(self):
        with pytest.raises(ValueError):
            CompletionRequest(())

    def test_rejects_negative_temperature(self):
        with pytest.raises(ValueError):
            req("x", temperature=-0.1)

    def test_rejects_unknown_role(self):
        with pytest.raises(ValueError):
            Message("tool", "x")

    def test_cache_key_sensitive_to_decoding(self):
        assert req("x").cache_key() == req("x").cache_key()
        assert req("x").cache_key() != req("x", temperature=0.5).cache_key()
        assert req("x").cache_key() != req("x", model="m").cache_key()


class TestScripted:
    def test_first_match_wins(self):
        b = ScriptedBackend([("hello", "one"), (re.compile(r"hel+o"), "two")], default="none")
        assert b.complete(req("hello there")).text == "one"
        assert b.complete(req("helllo")).text == "two"

    def test_default(self):
        assert ScriptedBackend([("x", "y")], default="fallback").complete(req("abc")).text == "fallback"

    def test_callable_matcher_and_response(self):
        b = ScriptedBackend([(lambda p: p.startswith("Q"), lambda p: p[::-1])])
        assert b.complete(req("Qab")).text == "baQ"

    def test_pure_function_of_prompt(self):
        b = ScriptedBackend([("a", "1")], default="0")
        outs = [b.complete(req(p)).text for p in ["a", "b", "a", "b"]]
        assert outs == ["1", "0", "1", "0"]
        assert b.call_count == 4


def chat_body(text: str, usage: dict | None = None) -> dict:
    body = {"choices": [{"message": {"role": "assistant", "content": text}}]}
    if usage:
        body["usage"] = usage
    return body


def make_http(handler, **kw) -> tuple[HttpBackend, list[float]]:
    sleeps: list[float] = []
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return HttpBackend("http://llm.test/v1", "key", "m1", client=client, sleep=sleeps.append, **kw), sleeps


class TestHttp:
    def test_wire_format(self):
        seen = {}

        def handler(request: httpx.Request):
            seen["url"] = str(request.url)
            seen["auth"] = request.headers["authorization"]
            seen["body"] = json.loads(request.content)
            return httpx.Response(200, json=chat_body("hi", {"prompt_tokens": 3, "completion_tokens": 1}))

        backend, _ = make_http(handler)
        out = backend.complete(req("hello", max_tokens=7))
        assert out.text == "hi"
        assert out.usage.total_tokens == 4
        assert seen["url"] == "http://llm.test/v1/chat/completions"
        assert seen["auth"] == "Bearer key"
        assert seen["body"] == {"model": "m1", "messages": [{"role": "user", "content": "hello"}], "temperature": 0.0, "max_tokens": 7}

    def test_retries_429_then_succeeds(self):
        codes = iter([429, 429, 200])

        def handler(request):
            code = next(codes)
            return httpx.Response(code, json=chat_body("ok") if code == 200 else {})

        backend, sleeps = make_http(handler)
        assert backend.complete(req("x")).text == "ok"
        assert backend.retries == 2
        assert sleeps == [1.0, 2.0]

    def test_rate_limited_after_three_attempts(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(429)

        backend, _ = make_http(handler)
        with pytest.raises(RateLimited):
            backend.complete(req("x"))
        assert len(calls) == 3

    def test_5xx_exhaustion_is_transport_error(self):
        backend, _ = make_http(lambda r: httpx.Response(503))
        with pytest.raises(TransportError):
            backend.complete(req("x"))

    def test_4xx_not_retried(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(400, text="bad")

        backend, _ = make_http(handler)
        with pytest.raises(ProtocolError):
            backend.complete(req("x"))
        assert len(calls) == 1

    def test_unexpected_body(self):
        backend, _ = make_http(lambda r: httpx.Response(200, json={"nope": 1}))
        with pytest.raises(ProtocolError):
            backend.complete(req("x"))

    def test_network_error(self):
        def handler(request):
            raise httpx.ConnectError("down")

        backend, _ = make_http(handler)
        with pytest.raises(TransportError):
            backend.complete(req("x"))

    def test_permit_limiter_bounds_in_flight(self):
        active, peak, lock = [0], [0], threading.Lock()
        gate = threading.Barrier(2, timeout=0.2)

        def handler(request):
            with lock:
                active[0] += 1
                peak[0] = max(peak[0], active[0])
            try:
                gate.wait()
            except threading.BrokenBarrierError:
                pass
            with lock:
                active[0] -= 1
            return httpx.Response(200, json=chat_body("ok"))

        backend, _ = make_http(handler, max_in_flight=1)
        threads = [threading.Thread(target=backend.complete, args=(req("x"),)) for _ in range(3)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert peak[0] == 1

    def test_from_env(self, monkeypatch):
        monkeypatch.setenv("HTAM_API_BASE", "http://env.test")
        monkeypatch.setenv("HTAM_MODEL", "env-model")
        backend = HttpBackend.from_env()
        assert backend.url == "http://env.test/chat/completions"
        assert backend.model == "env-model"


class TestCache:
    def test_second_call_hits_cache(self, tmp_path):
        inner = ScriptedBackend(default="answer")
        cached = CachedBackend(inner, tmp_path / "c.jsonl")
        assert cached.complete(req("q")).text == "answer"
        assert cached.complete(req("q")).cached
        assert inner.call_count == 1

    def test_distinct_temperature_distinct_key(self, tmp_path):
        inner = ScriptedBackend(default="a")
        cached = CachedBackend(inner, tmp_path / "c.jsonl")
        cached.complete(req("q"))
        cached.complete(req("q", temperature=0.7))
        assert inner.call_count == 2

    def test_persisted_jsonl(self, tmp_path):
        path = tmp_path / "c.jsonl"
        CachedBackend(ScriptedBackend(default="a"), path).complete(req("q"))
        (entry,) = [json.loads(line) for line in path.read_text().splitlines()]
        assert set(entry) == {"key", "value", "created_at"}
        inner = ScriptedBackend(default="other")
        warm = CachedBackend(inner, path)
        assert warm.complete(req("q")).text == "a"
        assert inner.call_count == 0

    def test_cache_is_transparent(self, tmp_path):
        inner = ScriptedBackend([("1", "one"), ("2", "two")], default="zero")
        cached = CachedBackend(ScriptedBackend(inner.rules, inner.default), tmp_path / "c.jsonl")
        prompts = ["1", "2", "3", "1", "3", "2"]
        assert [cached.complete(req(p)).text for p in prompts] == [inner.complete(req(p)).text for p in prompts]


class TestEmbedding:
    def test_identical_strings(self):
        v = HashingEmbedder().embed(["coastal erosion", "coastal erosion"])
        assert float(v[0] @ v[1]) == pytest.approx(1.0)

    def test_disjoint_tokens(self):
        v = HashingEmbedder().embed(["detect_ships", "crop yield"])
        assert float(v[0] @ v[1]) == pytest.approx(0.0)

    def test_batch_order_and_norm(self):
        texts = ["a b", "c", "d e f", ""]
        v = HashingEmbedder().embed(texts)
        assert v.shape[0] == 4
        assert np.allclose(np.linalg.norm(v[:3], axis=1), 1.0)
        assert np.allclose(v[1], HashingEmbedder().embed(["c"])[0])

    def test_http_embedder(self):
        def handler(request):
            body = json.loads(request.content)
            data = [{"index": i, "embedding": [float(len(t)), 1.0]} for i, t in enumerate(body["input"])]
            return httpx.Response(200, json={"data": data[::-1]})

        emb = HttpEmbedder("http://e.test", client=httpx.Client(transport=httpx.MockTransport(handler)))
        v = emb.embed(["abc", "a"])
        assert np.allclose(np.linalg.norm(v, axis=1), 1.0)
        assert v[0][0] > v[1][0]

    def test_http_embedder_failure(self):
        emb = HttpEmbedder("http://e.test", client=httpx.Client(transport=httpx.MockTransport(lambda r: httpx.Response(500))))
        with pytest.raises(ProviderFailure):
            emb.embed(["x"])


def test_usage_meter():
    meter = UsageMeter()
    backend = ScriptedBackend(default="x")
    ask(backend, "a", meter=meter)
    ask(backend, "b", meter=meter)
    assert meter.snapshot()["calls"] == 2
