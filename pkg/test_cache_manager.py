"""
Tests for the persistent torus-verdict cache.
"""

import pytest

import cache_manager
import settings


@pytest.fixture
def cache_dir(monkeypatch, tmp_path):
    monkeypatch.setattr(settings, "CACHE_DIR", tmp_path / "cache")
    monkeypatch.setattr(settings, "VERDICT_CACHE_ENABLED", True)
    return tmp_path / "cache"


def test_key_ignores_system_order_but_not_budget():
    a = cache_manager.verdict_key(["z1 + z2", "z1*z2"], 100)
    b = cache_manager.verdict_key(["z1*z2", "z1 + z2"], 100)
    c = cache_manager.verdict_key(["z1*z2", "z1 + z2"], 200)
    assert a == b
    assert a != c
    assert len(a) == 64


def test_round_trip(cache_dir):
    key = cache_manager.verdict_key(["z1"], 10)
    assert cache_manager.get_cached_verdict(key) is None
    cache_manager.set_cached_verdict(key, True)
    assert cache_manager.get_cached_verdict(key) is True
    assert (cache_dir / cache_manager.CACHE_FILE_NAME).exists()


def test_disabled_cache_is_inert(cache_dir, monkeypatch):
    key = cache_manager.verdict_key(["z1"], 10)
    cache_manager.set_cached_verdict(key, False)
    monkeypatch.setattr(settings, "VERDICT_CACHE_ENABLED", False)
    assert cache_manager.get_cached_verdict(key) is None


def test_corrupt_cache_file_is_ignored(cache_dir):
    cache_dir.mkdir(parents=True)
    (cache_dir / cache_manager.CACHE_FILE_NAME).write_text("{not json", encoding="utf-8")
    key = cache_manager.verdict_key(["z1"], 10)
    assert cache_manager.get_cached_verdict(key) is None
    cache_manager.set_cached_verdict(key, False)
    assert cache_manager.get_cached_verdict(key) is False


def test_clear_cache(cache_dir):
    key = cache_manager.verdict_key(["z1"], 10)
    cache_manager.set_cached_verdict(key, True)
    cache_manager.clear_cache()
    assert cache_manager.get_cached_verdict(key) is None
