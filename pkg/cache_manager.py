"""Persistent file-based cache for torus-emptiness verdicts, so repeated corpus runs skip Gröbner work."""

import hashlib
import json
import logging
import threading
import time
from pathlib import Path
from typing import Any, Iterable, Optional

import settings

logger = logging.getLogger(__name__)

CACHE_FILE_NAME = "torus_verdicts.json"
_lock = threading.Lock()


def _cache_file() -> Path:
    return Path(settings.CACHE_DIR) / CACHE_FILE_NAME


def _ensure_cache_dir():
    """Create cache directory if it doesn't exist."""
    Path(settings.CACHE_DIR).mkdir(parents=True, exist_ok=True)


def _load_cache() -> dict[str, dict[str, Any]]:
    """Load the entire cache from disk."""
    path = _cache_file()
    if not path.exists():
        return {}
    try:
        with path.open("r", encoding="utf-8") as f:
            return json.load(f)
    except Exception as e:
        logger.warning(f"⚠️ Ignoring unreadable verdict cache {path}: {e}")
        return {}


def _save_cache(cache: dict[str, dict[str, Any]]):
    """Write the entire cache to disk."""
    try:
        _ensure_cache_dir()
        with _cache_file().open("w", encoding="utf-8") as f:
            json.dump(cache, f, indent=2, sort_keys=True)
    except Exception as e:
        logger.warning(f"⚠️ Could not write verdict cache: {e}")


def verdict_key(system_texts: Iterable[str], step_budget: int) -> str:
    """
    Cache key for one torus-emptiness query.
    The canonical printed system plus the budget and tool version, hashed with sha256.
    """
    payload = json.dumps(
        {
            "system": sorted(system_texts),
            "budget": step_budget,
            "version": settings.TOOL_VERSION,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def get_cached_verdict(key: str) -> Optional[bool]:
    """
    Return the cached emptiness verdict (True = empty on the torus).
    Returns None on cache miss or when the cache is disabled.
    """
    if not settings.VERDICT_CACHE_ENABLED:
        return None
    with _lock:
        entry = _load_cache().get(key)
    if not entry:
        return None
    verdict = entry.get("empty")
    return verdict if isinstance(verdict, bool) else None


def set_cached_verdict(key: str, empty: bool):
    """Store a verdict with current timestamp. Resource-exhausted outcomes are never stored."""
    if not settings.VERDICT_CACHE_ENABLED:
        return
    with _lock:
        cache = _load_cache()
        cache[key] = {
            "cached_at": time.time(),
            "empty": bool(empty),
        }
        _save_cache(cache)


def clear_cache():
    """Remove all cached verdicts."""
    path = _cache_file()
    if path.exists():
        path.unlink()
