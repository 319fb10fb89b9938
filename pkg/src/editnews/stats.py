"""Per-page daily view counts for the relevance rank.

Sources are either a live URL template (``{title}`` is replaced by the
page title) returning the ``latest30`` JSON shape, or a fixture directory
holding one such document per page, named ``<Title_with_underscores>.json``.
Both shapes are accepted: ``{"daily_views": {date: count}, ...}`` or the
bare ``{date: count}`` mapping.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path
from urllib.parse import quote

from .clock import utc_now
from .errors import ParseError, ProviderError, TransportError
from .transport import PoliteClient

logger = logging.getLogger(__name__)

WINDOW_DAYS = 30


@dataclass(frozen=True)
class PageViewStats:
    page_title: str
    daily_views: tuple[int, ...]
    missing: bool = False

    def __post_init__(self):
        if len(self.daily_views) != WINDOW_DAYS:
            raise ValueError(f"expected {WINDOW_DAYS} daily buckets")
        if any(v < 0 for v in self.daily_views):
            raise ValueError("view counts must be non-negative")

    @property
    def views_yesterday(self) -> int:
        return self.daily_views[-1]

    @property
    def views_last_30_days_total(self) -> int:
        return sum(self.daily_views)

    @classmethod
    def zeros(cls, page_title, missing=True):
        return cls(page_title, (0,) * WINDOW_DAYS, missing=missing)


def yesterday_of(now: datetime) -> date:
    """The most recent complete UTC day."""
    return now.date() - timedelta(days=1)


def stats_from_document(page_title, doc, yesterday: date) -> PageViewStats:
    views = doc.get("daily_views", doc) if isinstance(doc, dict) else None
    if not isinstance(views, dict):
        raise ParseError("expected a mapping of dates to counts", field="daily_views")
    by_day = {}
    for key, count in views.items():
        try:
            day = date.fromisoformat(str(key)[:10])
        except ValueError:
            raise ParseError(f"bad date {key!r}", field="daily_views") from None
        if isinstance(count, bool) or not isinstance(count, int) or count < 0:
            raise ParseError(f"bad count for {key}", field="daily_views")
        by_day[day] = count
    first = yesterday - timedelta(days=WINDOW_DAYS - 1)
    buckets = tuple(by_day.get(first + timedelta(days=i), 0) for i in range(WINDOW_DAYS))
    return PageViewStats(page_title, buckets)


def fixture_filename(page_title: str) -> str:
    return page_title.replace(" ", "_").replace("/", "%2F") + ".json"


def fetch_stats(
    page_title: str,
    source: str | Path,
    *,
    now: datetime | None = None,
    http: PoliteClient | None = None,
) -> PageViewStats:
    """Thirty daily view buckets ending yesterday, oldest first.

    A page the source does not know yields all-zero stats with ``missing``
    set. Transport failures raise ``ProviderError``.
    """
    yesterday = yesterday_of(now or utc_now())
    source = str(source)
    if source.startswith(("http://", "https://")):
        url = source.replace("{title}", quote(page_title.replace(" ", "_"), safe=""))
        http = http if http is not None else PoliteClient()
        try:
            response = http.get(url)
        except TransportError as exc:
            raise ProviderError(f"stats for {page_title!r}: {exc}") from exc
        if response.status_code == 404:
            logger.warning("no stats for %r", page_title)
            return PageViewStats.zeros(page_title)
        if response.status_code >= 400:
            raise ProviderError(f"stats for {page_title!r}: HTTP {response.status_code}")
        try:
            doc = response.json()
        except ValueError:
            raise ProviderError(f"stats for {page_title!r}: response is not JSON") from None
    else:
        path = Path(source) / fixture_filename(page_title)
        if not path.exists():
            logger.warning("no stats fixture for %r", page_title)
            return PageViewStats.zeros(page_title)
        doc = json.loads(path.read_text(encoding="utf-8"))
    return stats_from_document(page_title, doc, yesterday)
