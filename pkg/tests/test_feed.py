import json
from datetime import timedelta

from hypothesis import given
from hypothesis import strategies as st

from conftest import T0
from editnews.feed import FEED_FIELDS, dumps_feed, from_feed_obj, to_feed_obj
from editnews.store import NewsItem

items = st.builds(
    lambda pid, mins, later, revs, title, v: NewsItem(
        item_id=f"{pid}-x",
        page_id=pid,
        title=title,
        summary="Summary.",
        categories=("Zeta", "Alpha"),
        generated_at=T0 + timedelta(minutes=mins),
        updated_at=T0 + timedelta(minutes=mins + later),
        source_revision_ids=tuple(revs),
        final_rank=v + 1.0,
        rank_breakdown={"relevance": (v, 1.0), "common_authors": (1.0, 1.0)},
    ),
    st.integers(1, 10**6),
    st.integers(0, 10**5),
    st.integers(0, 600),
    st.lists(st.integers(1, 10**9), min_size=1, max_size=5),
    st.text(min_size=1, max_size=30),
    st.sampled_from([0.0, 0.25, 0.5, 1 / 3]),
)


@given(items)
def test_round_trip(item):
    obj = json.loads(json.dumps(to_feed_obj(item)))
    assert tuple(obj) == FEED_FIELDS
    assert from_feed_obj(obj) == item


def test_breakdown_sorted_and_unicode_kept():
    item = NewsItem("1-x", 1, "Malmö", "Ö.", (), T0, T0, (1,), 1.0, {"b": (0.5, 1.0), "a": (0.5, 1.0)})
    text = dumps_feed([item])
    assert "Malmö" in text and text.endswith("]\n")
    assert list(json.loads(text)[0]["rank_breakdown"]) == ["a", "b"]
