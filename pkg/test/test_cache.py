from gengap.cache import ResultCache, cache_key
from gengap.config import Settings


def test_cache_keys_depend_on_the_whole_request():
    assert cache_key({"a": 1, "b": [2]}) == cache_key({"b": [2], "a": 1})
    assert cache_key({"a": 1}) != cache_key({"a": 2})


def test_store_and_load(tmp_path):
    cache = ResultCache(tmp_path / "nested")
    key = cache_key({"command": "relation"})
    assert cache.load(key) is None
    cache.store(key, {"result": 3})
    assert cache.load(key) == {"result": 3}
    assert not list((tmp_path / "nested").glob("*.tmp"))


def test_entries_stored_under_another_key_are_ignored(tmp_path):
    cache = ResultCache(tmp_path)
    key, other = cache_key({"x": 1}), cache_key({"x": 2})
    cache.store(key, {"result": 1})
    (tmp_path / f"{key}.json").rename(tmp_path / f"{other}.json")
    assert cache.load(other) is None


def test_disabled_cache_is_a_no_op():
    cache = ResultCache(None)
    assert not cache.enabled
    cache.store("k", {"result": 1})
    assert cache.load("k") is None


def test_settings_from_env(monkeypatch, tmp_path):
    monkeypatch.setenv("GENGAP_SEED", "7")
    monkeypatch.setenv("GENGAP_CACHE_DIR", str(tmp_path))
    monkeypatch.delenv("GENGAP_LOG", raising=False)
    settings = Settings.from_env()
    assert settings.seed == 7
    assert settings.cache_dir == tmp_path
    assert settings.log_level == "WARNING"
    assert Settings.from_env(seed=3, log_level=None).seed == 3
