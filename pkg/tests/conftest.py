import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from editnews.feed import from_feed_obj
from editnews.ingest import EditRecord, build_working_set, replay_stream
from editnews.stats import fetch_stats, fixture_filename
from editnews.store import GraphStore
from oracles import brute_views

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
TEST_FIXTURES = Path(__file__).resolve().parent / "fixtures"
G1_DIR = TEST_FIXTURES / "g1"
G1_CLOCK = datetime(2013, 5, 21, 9, 0, tzinfo=timezone.utc)
REPLAY_CLOCK = datetime(2013, 5, 20, 22, 45, tzinfo=timezone.utc)

T0 = datetime(2013, 5, 20, 12, 0, tzinfo=timezone.utc)


def make_edit(rev, page=1, author="a", minutes=0, text="x", title=None, categories=(), ns=0, bot=False):
    return EditRecord(
        revision_id=rev,
        page_id=page,
        page_title=title or f"Page {page}",
        namespace=ns,
        author=author,
        is_bot=bot,
        timestamp=T0 + timedelta(minutes=minutes),
        comment="",
        added_text=text,
        categories=tuple(categories),
    )


@pytest.fixture
def store():
    s = GraphStore(":memory:")
    yield s
    s.close()


def g1_views(title):
    """(yesterday, 30-day total) read straight from the G1 stats fixture."""
    path = G1_DIR / "stats" / fixture_filename(title)
    if not path.exists():
        return (0, 0)
    daily = json.loads(path.read_text())["daily_views"]
    return brute_views(daily, (G1_CLOCK - timedelta(days=1)).date())


class G1:
    """The G1 test graph: six pages, eight authors, one prior news item."""

    def __init__(self, store):
        self.store = store
        self.edits = replay_stream(G1_DIR / "edits.jsonl")
        self.raw_edits = [json.loads(l) for l in (G1_DIR / "edits.jsonl").read_text().splitlines()]
        self.raw_news = json.loads((G1_DIR / "news.json").read_text())
        self.ws = build_working_set(self.edits, "g1")
        store.ingest_working_set(self.ws)
        for obj in self.raw_news:
            store.save_news_item(from_feed_obj(obj))
        self.stats = {
            pid: fetch_stats(p.title, G1_DIR / "stats", now=G1_CLOCK) for pid, p in self.ws.pages.items()
        }


@pytest.fixture
def g1(store):
    return G1(store)


def replay_config(tmp_path, stream="stream.jsonl"):
    """The bundled fixture config with the store moved into ``tmp_path``."""
    from editnews.config import load_config

    cfg = load_config(FIXTURES / "config.json")
    cfg.storage.path = str(tmp_path / "news.db")
    cfg.ingest.stream_path = str(FIXTURES / stream)
    return cfg
