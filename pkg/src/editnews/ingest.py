"""Edit acquisition: recorded change streams, the live recent-changes API,
and grouping of edits into a per-run working set."""

from __future__ import annotations

import html
import json
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable

from .clock import format_instant, parse_instant, utc_now
from .errors import ParseError, TransportError
from .transport import PoliteClient

logger = logging.getLogger(__name__)


def normalize_category(name: str) -> str:
    name = name.strip()
    if name.lower().startswith("category:"):
        name = name[len("category:") :]
    return name.strip()


@dataclass(frozen=True)
class EditRecord:
    revision_id: int
    page_id: int
    page_title: str
    namespace: int
    author: str
    is_bot: bool
    timestamp: datetime
    comment: str
    added_text: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")
        object.__setattr__(self, "timestamp", parse_instant(self.timestamp))
        object.__setattr__(
            self, "categories", tuple(normalize_category(c) for c in self.categories)
        )

    @property
    def added_char_count(self) -> int:
        return len(self.added_text)


@dataclass(frozen=True)
class IngestFilters:
    namespaces: frozenset[int] | None = frozenset({0})
    exclude_bots: bool = True

    def accepts(self, edit: EditRecord) -> bool:
        if self.namespaces is not None and edit.namespace not in self.namespaces:
            return False
        return not (self.exclude_bots and edit.is_bot)

    def apply(self, edits: Iterable[EditRecord]) -> list[EditRecord]:
        return [e for e in edits if self.accepts(e)]


@dataclass(frozen=True)
class PageEntry:
    page_id: int
    title: str
    categories: tuple[str, ...]
    edits: tuple[EditRecord, ...]


@dataclass(frozen=True)
class WorkingSet:
    run_id: str
    window_start: datetime
    window_end: datetime
    pages: dict[int, PageEntry] = field(default_factory=dict)

    def __len__(self):
        return len(self.pages)

    @property
    def edit_count(self) -> int:
        return sum(len(p.edits) for p in self.pages.values())

    def edits(self) -> list[EditRecord]:
        """All contained edits, oldest first."""
        flat = [e for p in self.pages.values() for e in p.edits]
        return sorted(flat, key=lambda e: (e.timestamp, e.revision_id))


def dedupe(edits: Iterable[EditRecord]) -> list[EditRecord]:
    seen = set()
    out = []
    for e in edits:
        if e.revision_id not in seen:
            seen.add(e.revision_id)
            out.append(e)
    return out


def build_working_set(
    edits: Iterable[EditRecord],
    run_id: str,
    *,
    window: tuple[datetime, datetime] | None = None,
    max_pages: int | None = None,
) -> WorkingSet:
    """Group edits by page.

    When ``max_pages`` is set, only the pages with the most edits are kept
    (ties go to the lower page id). ``window`` supplies the bounds of an
    empty working set.
    """
    grouped: dict[int, list[EditRecord]] = {}
    for e in dedupe(edits):
        grouped.setdefault(e.page_id, []).append(e)

    page_ids = sorted(grouped, key=lambda pid: (-len(grouped[pid]), pid))
    if max_pages is not None:
        page_ids = page_ids[:max_pages]

    pages = {}
    for pid in sorted(page_ids):
        page_edits = sorted(grouped[pid], key=lambda e: (e.timestamp, e.revision_id))
        categories: list[str] = []
        for e in page_edits:
            categories.extend(c for c in e.categories if c not in categories)
        pages[pid] = PageEntry(
            page_id=pid,
            title=page_edits[-1].page_title,
            categories=tuple(sorted(categories)),
            edits=tuple(page_edits),
        )

    stamps = [e.timestamp for p in pages.values() for e in p.edits]
    if stamps:
        start, end = min(stamps), max(stamps)
    elif window is not None:
        start, end = window
    else:
        start = end = utc_now()
    return WorkingSet(run_id=run_id, window_start=start, window_end=end, pages=pages)


# -- recorded change streams ------------------------------------------------

_STREAM_FIELDS = {
    "ts": str,
    "rev_id": int,
    "page_id": int,
    "page_title": str,
    "ns": int,
    "user": str,
    "bot": bool,
    "comment": str,
    "added_text": str,
    "categories": list,
}


def parse_stream_line(obj, line_no=None) -> EditRecord:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", line=line_no)
    for name, kind in _STREAM_FIELDS.items():
        if name not in obj:
            raise ParseError("missing required field", field=name, line=line_no)
        value = obj[name]
        # bool is a subclass of int; keep the two apart
        if kind is int and isinstance(value, bool) or not isinstance(value, kind):
            raise ParseError(
                f"expected {kind.__name__}, got {type(value).__name__}",
                field=name,
                line=line_no,
            )
    if not all(isinstance(c, str) for c in obj["categories"]):
        raise ParseError("categories must be strings", field="categories", line=line_no)
    try:
        ts = parse_instant(obj["ts"])
    except ValueError as exc:
        raise ParseError(f"bad timestamp: {exc}", field="ts", line=line_no) from None
    return EditRecord(
        revision_id=obj["rev_id"],
        page_id=obj["page_id"],
        page_title=obj["page_title"],
        namespace=obj["ns"],
        author=obj["user"],
        is_bot=obj["bot"],
        timestamp=ts,
        comment=obj["comment"],
        added_text=obj["added_text"],
        categories=tuple(obj["categories"]),
    )


def edit_to_stream_obj(edit: EditRecord) -> dict:
    return {
        "ts": format_instant(edit.timestamp),
        "rev_id": edit.revision_id,
        "page_id": edit.page_id,
        "page_title": edit.page_title,
        "ns": edit.namespace,
        "user": edit.author,
        "bot": edit.is_bot,
        "comment": edit.comment,
        "added_text": edit.added_text,
        "categories": list(edit.categories),
    }


def replay_stream(path) -> list[EditRecord]:
    """Read a line-delimited JSON change stream; duplicates keep the first."""
    records = []
    with open(Path(path), encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=line_no) from None
            records.append(parse_stream_line(obj, line_no))
    return dedupe(records)


def write_stream(path, edits: Iterable[EditRecord]):
    with open(Path(path), "w", encoding="utf-8") as fh:
        for e in edits:
            fh.write(json.dumps(edit_to_stream_obj(e), ensure_ascii=False) + "\n")


# -- live MediaWiki API -----------------------------------------------------

_ADDED_CELL = re.compile(r'<td class="diff-addedline[^"]*"[^>]*>(.*?)</td>', re.S)
_TAG = re.compile(r"<[^>]+>")


def added_text_from_diff(body: str) -> str:
    """Inserted lines of a MediaWiki HTML diff table, as plain text."""
    lines = []
    for cell in _ADDED_CELL.findall(body):
        text = html.unescape(_TAG.sub("", cell)).strip()
        if text:
            lines.append(text)
    return "\n".join(lines)


def _require(obj, key, context):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise ParseError(f"malformed {context} response", field=key) from None


class MediaWikiClient:
    """Minimal client for the recent-changes, categories and compare APIs."""

    def __init__(self, endpoint: str, http: PoliteClient | None = None, extra_params=None):
        self.endpoint = endpoint
        self.http = http if http is not None else PoliteClient()
        self.extra_params = dict(extra_params or {})

    def _query(self, params):
        params = {"format": "json", "formatversion": "2", **self.extra_params, **params}
        response = self.http.get(self.endpoint, params=params)
        if response.status_code >= 400:
            raise TransportError("API error", status=response.status_code, url=self.endpoint)
        try:
            data = response.json()
        except ValueError:
            raise ParseError("response is not JSON", field="body") from None
        if isinstance(data, dict) and "error" in data:
            info = data["error"].get("info", data["error"]) if isinstance(data["error"], dict) else data["error"]
            raise ParseError(f"API reported an error: {info}", field="error")
        return data

    def _paged(self, params):
        cont: dict = {}
        while True:
            data = self._query({**params, **cont})
            yield data
            if not isinstance(data, dict) or "continue" not in data:
                return
            cont = dict(_require(data, "continue", "continuation"))

    def recent_changes(self, start: datetime, end: datetime, namespaces=None):
        params = {
            "action": "query",
            "list": "recentchanges",
            "rcprop": "title|ids|sizes|flags|user|timestamp|comment",
            "rctype": "edit|new",
            "rcdir": "newer",
            "rcstart": format_instant(start),
            "rcend": format_instant(end),
            "rclimit": "500",
        }
        if namespaces is not None:
            params["rcnamespace"] = "|".join(str(n) for n in sorted(namespaces))
        for data in self._paged(params):
            query = _require(data, "query", "recentchanges")
            yield from _require(query, "recentchanges", "recentchanges")

    def categories(self, page_ids) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        ids = sorted(set(page_ids))
        for i in range(0, len(ids), 50):
            batch = ids[i : i + 50]
            params = {
                "action": "query",
                "prop": "categories",
                "pageids": "|".join(str(p) for p in batch),
                "cllimit": "max",
            }
            for data in self._paged(params):
                pages = _require(_require(data, "query", "categories"), "pages", "categories")
                for page in pages:
                    pid = _require(page, "pageid", "categories")
                    cats = out.setdefault(pid, [])
                    for c in page.get("categories", []):
                        name = normalize_category(_require(c, "title", "categories"))
                        if name not in cats:
                            cats.append(name)
        return out

    def added_text(self, old_revid: int, revid: int) -> str:
        if not old_revid:
            data = self._query(
                {
                    "action": "query",
                    "prop": "revisions",
                    "revids": str(revid),
                    "rvprop": "content",
                    "rvslots": "main",
                }
            )
            pages = _require(_require(data, "query", "revisions"), "pages", "revisions")
            rev = _require(_require(pages[0], "revisions", "revisions")[0], "slots", "revisions")
            return _require(_require(rev, "main", "revisions"), "content", "revisions")
        data = self._query({"action": "compare", "fromrev": str(old_revid), "torev": str(revid)})
        body = _require(_require(data, "compare", "compare"), "body", "compare")
        return added_text_from_diff(body)


def _change_to_edit(change, categories, text) -> EditRecord:
    for key in ("revid", "pageid", "title", "ns", "timestamp"):
        _require(change, key, "recentchanges")
    try:
        ts = parse_instant(change["timestamp"])
    except ValueError:
        raise ParseError("bad timestamp", field="timestamp") from None
    bot = change.get("bot", False)
    return EditRecord(
        revision_id=int(change["revid"]),
        page_id=int(change["pageid"]),
        page_title=change["title"],
        namespace=int(change["ns"]),
        author=str(change.get("user", "")),
        is_bot=bot is True or bot == "",
        timestamp=ts,
        comment=str(change.get("comment", "")),
        added_text=text,
        categories=tuple(categories),
    )


def fetch_recent_changes(
    api_endpoint: str,
    window: tuple[datetime, datetime],
    filters: IngestFilters = IngestFilters(),
    *,
    client: MediaWikiClient | None = None,
) -> list[EditRecord]:
    """All qualifying edits in ``window`` (inclusive), oldest first.

    Added text comes from the revision diff; when that fails the edit
    comment stands in for it.
    """
    start, end = window
    if not start < end:
        raise ValueError("window start must precede window end")
    client = client if client is not None else MediaWikiClient(api_endpoint)

    changes = []
    for change in client.recent_changes(start, end, filters.namespaces):
        # bot and namespace flags are enough to filter before the costly lookups
        probe = _change_to_edit(change, (), "")
        if filters.accepts(probe) and start <= probe.timestamp <= end:
            changes.append(change)

    categories = client.categories(c["pageid"] for c in changes) if changes else {}
    edits = []
    for change in changes:
        try:
            text = client.added_text(change.get("old_revid", 0), change["revid"])
        except (TransportError, ParseError, IndexError) as exc:
            logger.warning("diff for revision %s unavailable: %s", change["revid"], exc)
            text = str(change.get("comment", ""))
        edits.append(_change_to_edit(change, categories.get(change["pageid"], ()), text))
    edits.sort(key=lambda e: (e.timestamp, e.revision_id))
    return dedupe(edits)
