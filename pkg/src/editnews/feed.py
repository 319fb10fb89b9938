"""The JSON feed schema shared by the HTTP service, the export command and
the benchmark reader."""

import json

from .clock import format_instant, parse_instant
from .store import NewsItem

FEED_FIELDS = (
    "id",
    "page_id",
    "title",
    "summary",
    "categories",
    "generated_at",
    "updated_at",
    "final_rank",
    "rank_breakdown",
    "source_revision_ids",
)


def to_feed_obj(item: NewsItem) -> dict:
    return {
        "id": item.item_id,
        "page_id": item.page_id,
        "title": item.title,
        "summary": item.summary,
        "categories": list(item.categories),
        "generated_at": format_instant(item.generated_at),
        "updated_at": format_instant(item.updated_at),
        "final_rank": item.final_rank,
        "rank_breakdown": {
            name: {"value": value, "weight": weight}
            for name, (value, weight) in sorted(item.rank_breakdown.items())
        },
        "source_revision_ids": list(item.source_revision_ids),
    }


def from_feed_obj(obj: dict) -> NewsItem:
    return NewsItem(
        item_id=obj["id"],
        page_id=obj["page_id"],
        title=obj["title"],
        summary=obj["summary"],
        categories=tuple(obj["categories"]),
        generated_at=parse_instant(obj["generated_at"]),
        updated_at=parse_instant(obj["updated_at"]),
        source_revision_ids=tuple(obj["source_revision_ids"]),
        final_rank=obj["final_rank"],
        rank_breakdown={k: (v["value"], v["weight"]) for k, v in obj["rank_breakdown"].items()},
    )


def dumps_feed(items) -> str:
    return json.dumps([to_feed_obj(i) for i in items], indent=2, ensure_ascii=False) + "\n"


def export_feed(store, path=None) -> str:
    """Serialize every stored news item, most recently updated first."""
    text = dumps_feed(store.list_news())
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
