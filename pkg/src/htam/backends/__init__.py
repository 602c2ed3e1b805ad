from .base import (
    Completion,
    CompletionBackend,
    CompletionRequest,
    Decoding,
    Message,
    Usage,
    UsageMeter,
    ask,
)
from .cache import CachedBackend, cache_wrap
from .embedding import EmbeddingProvider, HashingEmbedder, HttpEmbedder, normalize_rows, tokens
from .heuristic import HeuristicBackend
from .http import HttpBackend
from .scripted import ScriptedBackend

__all__ = [
    "CachedBackend",
    "Completion",
    "CompletionBackend",
    "CompletionRequest",
    "Decoding",
    "EmbeddingProvider",
    "HashingEmbedder",
    "HeuristicBackend",
    "HttpBackend",
    "HttpEmbedder",
    "Message",
    "ScriptedBackend",
    "Usage",
    "UsageMeter",
    "ask",
    "cache_wrap",
    "normalize_rows",
    "tokens",
]
