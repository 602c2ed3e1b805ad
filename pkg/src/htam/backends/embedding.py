"""Embedding providers.  All return L2-normalised rows so that cosine
similarity is a plain dot product."""

from __future__ import annotations

import hashlib
import os
import re
from collections.abc import Sequence
from typing import Protocol

import httpx
import numpy as np

from ..errors import ProviderFailure

_TOKEN = re.compile(r"[a-z0-9]+")


def tokens(text: str) -> list[str]:
    """Lower-cased alphanumeric tokens; underscores and whitespace split."""
    return _TOKEN.findall(text.lower())


def normalize_rows(mat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    return np.divide(mat, norms, out=np.zeros_like(mat), where=norms > 0)


class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class HashingEmbedder:
    """Deterministic bag-of-tokens embedding via hashed token counts."""

    def __init__(self, dim: int = 4096):
        self.dim = dim

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % self.dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        mat = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            for tok in tokens(text):
                mat[i, self._bucket(tok)] += 1.0
        return normalize_rows(mat)


class HttpEmbedder:
    """OpenAI-style ``/embeddings`` endpoint."""

    def __init__(self, api_base: str, api_key: str = "", model: str = "", timeout: float = 60.0, client: httpx.Client | None = None):
        self.url = api_base.rstrip("/") + "/embeddings"
        self.api_key = api_key
        self.model = model
        self._client = client or httpx.Client(timeout=timeout)

    @classmethod
    def from_env(cls) -> HttpEmbedder:
        return cls(
            os.environ.get("HTAM_API_BASE", ""),
            os.environ.get("HTAM_API_KEY", ""),
            os.environ.get("HTAM_EMBED_MODEL", ""),
        )

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, 0))
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = self._client.post(self.url, json={"model": self.model, "input": list(texts)}, headers=headers)
            resp.raise_for_status()
            rows = sorted(resp.json()["data"], key=lambda r: r.get("index", 0))
            mat = np.asarray([r["embedding"] for r in rows], dtype=float)
        except (httpx.HTTPError, ValueError, KeyError, TypeError) as exc:
            raise ProviderFailure(f"embedding request failed: {exc}") from exc
        if mat.shape[0] != len(texts):
            raise ProviderFailure(f"expected {len(texts)} embeddings, got {mat.shape[0]}")
        return normalize_rows(mat)
