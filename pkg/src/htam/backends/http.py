"""HTTP chat-completions client."""

from __future__ import annotations

import logging
import os
import threading
import time

import httpx

from ..errors import ProtocolError, RateLimited, TransportError
from .base import Completion, CompletionRequest, Usage

log = logging.getLogger(__name__)

RETRY_STATUS = {429, 500, 502, 503, 504}


class HttpBackend:
    """POSTs OpenAI-style chat-completion bodies to ``{api_base}/chat/completions``.

    Retries 429 and 5xx responses with exponential backoff; at most
    ``max_in_flight`` requests run concurrently.
    """

    def __init__(
        self,
        api_base: str,
        api_key: str = "",
        model: str = "",
        timeout: float = 60.0,
        max_attempts: int = 3,
        backoff: float = 1.0,
        max_in_flight: int = 4,
        client: httpx.Client | None = None,
        sleep=time.sleep,
    ):
        self.url = api_base.rstrip("/") + "/chat/completions"
        self.api_key = api_key
        self.model = model
        self.max_attempts = max_attempts
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout)
        self._permits = threading.BoundedSemaphore(max_in_flight)
        self._sleep = sleep
        self.retries = 0

    @classmethod
    def from_env(cls, **kwargs) -> HttpBackend:
        base = kwargs.pop("api_base", None) or os.environ.get("HTAM_API_BASE", "")
        if not base:
            raise ValueError("HTAM_API_BASE is not set")
        return cls(
            base,
            api_key=kwargs.pop("api_key", None) or os.environ.get("HTAM_API_KEY", ""),
            model=kwargs.pop("model", None) or os.environ.get("HTAM_MODEL", ""),
            **kwargs,
        )

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def complete(self, request: CompletionRequest) -> Completion:
        body = request.body()
        if not body["model"]:
            body["model"] = self.model
        with self._permits:
            resp = self._post_with_retry(body)
        try:
            data = resp.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"unexpected response body: {resp.text[:200]!r}") from exc
        return Completion(text or "", Usage.from_body(data.get("usage")))

    def _post_with_retry(self, body: dict) -> httpx.Response:
        for attempt in range(1, self.max_attempts + 1):
            try:
                resp = self._client.post(self.url, json=body, headers=self._headers())
            except httpx.HTTPError as exc:
                raise TransportError(str(exc)) from exc
            if resp.status_code < 400:
                return resp
            if resp.status_code not in RETRY_STATUS:
                raise ProtocolError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            if attempt == self.max_attempts:
                if resp.status_code == 429:
                    raise RateLimited(f"rate limited after {attempt} attempts")
                raise TransportError(f"HTTP {resp.status_code} after {attempt} attempts")
            delay = self.backoff * 2 ** (attempt - 1)
            self.retries += 1
            log.warning("HTTP %s, retry %d in %.1fs", resp.status_code, attempt, delay)
            self._sleep(delay)
        raise AssertionError("unreachable")
