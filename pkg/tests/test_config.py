import json
from fractions import Fraction

import pytest

from conftest import FIXTURES
from editnews.config import Config, config_from_dict, load_config
from editnews.errors import ConfigError


def test_defaults():
    cfg = Config()
    assert cfg.ingest.window_minutes == 60 and cfg.ingest.max_pages == 500
    assert cfg.ingest.filters.namespaces == frozenset({0}) and cfg.ingest.filters.exclude_bots
    assert cfg.ranks.threshold == 1
    assert set(cfg.ranks.weights.values()) == {1}
    assert cfg.selection.min_chars == 50 and cfg.selection.top_editor_k == 50 and cfg.selection.expert_k == 5
    assert cfg.summarizer.sentence_limit == 7
    assert cfg.dedup.horizon.total_seconds() == 48 * 3600
    assert cfg.benchmark.thresholds.minimum == Fraction(1, 4)
    assert cfg.schedule.interval_minutes == 15


def test_bundled_config_resolves_paths():
    cfg = load_config(FIXTURES / "config.json")
    assert cfg.ingest.stream_path == str(FIXTURES / "stream.jsonl")
    assert cfg.stats.source == str(FIXTURES / "stats")


def test_ranks_section():
    cfg = config_from_dict({"ranks": {"weights": {"relevance": 2.5}, "threshold": 0.7, "enabled": ["relevance", "common_authors"]}})
    assert cfg.ranks.weights["relevance"] == Fraction(5, 2)
    assert cfg.ranks.threshold == Fraction(7, 10)
    assert cfg.ranks.enabled == ("relevance", "common_authors")


@pytest.mark.parametrize(
    "doc",
    [
        {"nonsense": {}},
        {"ingest": {"windw_minutes": 5}},
        {"ranks": {"enabled": ["popularity"]}},
        {"ranks": {"weights": {"relevance": -1}}},
        {"selection": {"mode": "most"}},
        {"summarizer": {"sentence_limit": 0}},
        {"storage": "db"},
        [],
    ],
)
def test_rejects_bad_config(doc):
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_invalid_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{")
    with pytest.raises(ConfigError):
        load_config(p)


def test_urls_and_absolute_paths_kept(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"stats": {"source": "https://s.test/{title}"}, "storage": {"path": "/abs/x.db"}}))
    cfg = load_config(p)
    assert cfg.stats.source == "https://s.test/{title}"
    assert cfg.storage.path == "/abs/x.db"
