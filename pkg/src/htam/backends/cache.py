"""Read-through response cache persisted as append-only JSONL."""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path

from .base import Completion, CompletionBackend, CompletionRequest


class CachedBackend:
    def __init__(self, backend: CompletionBackend, path: str | Path):
        self.backend = backend
        self.path = Path(path)
        self._lock = threading.Lock()
        self._store: dict[str, str] = {}
        self.hits = 0
        self.misses = 0
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        entry = json.loads(line)
                        self._store[entry["key"]] = entry["value"]

    def complete(self, request: CompletionRequest) -> Completion:
        key = request.cache_key()
        cached = self._store.get(key)
        if cached is not None:
            self.hits += 1
            return Completion(cached, cached=True)
        completion = self.backend.complete(request)
        entry = {"key": key, "value": completion.text, "created_at": datetime.now(timezone.utc).isoformat()}
        with self._lock:
            self.misses += 1
            self._store[key] = completion.text
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
        return completion

    def __len__(self) -> int:
        return len(self._store)


def cache_wrap(backend: CompletionBackend, path: str | Path) -> CachedBackend:
    return CachedBackend(backend, path)
