"""The authorgraph: pages, authors, categories, edits, news items and runs,
persisted in an embedded SQLite file.

Every write happens inside one transaction, so a working set or a batch of
news items is applied completely or not at all. The database runs in WAL
mode; a reader sees only committed runs.
"""

from __future__ import annotations

import json
import logging
import math
import sqlite3
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

from .clock import format_instant
from .errors import IntegrityFailure, LookupFailure, StorageFailure
from .ingest import WorkingSet
from .stats import PageViewStats

logger = logging.getLogger(__name__)

DEFAULT_DEDUP_HORIZON = timedelta(hours=48)

SCHEMA = """
CREATE TABLE IF NOT EXISTS pages (
    page_id INTEGER PRIMARY KEY,
    title TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS page_categories (
    page_id INTEGER NOT NULL REFERENCES pages(page_id),
    category TEXT NOT NULL,
    PRIMARY KEY (page_id, category)
);
CREATE INDEX IF NOT EXISTS page_categories_by_category ON page_categories(category);
CREATE TABLE IF NOT EXISTS authors (
    author_id TEXT PRIMARY KEY
);
CREATE TABLE IF NOT EXISTS edits (
    revision_id INTEGER PRIMARY KEY,
    page_id INTEGER NOT NULL REFERENCES pages(page_id),
    author_id TEXT NOT NULL REFERENCES authors(author_id),
    ts TEXT NOT NULL,
    namespace INTEGER NOT NULL,
    is_bot INTEGER NOT NULL,
    comment TEXT NOT NULL,
    added_text TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS edits_by_page ON edits(page_id, author_id);
CREATE INDEX IF NOT EXISTS edits_by_author ON edits(author_id, page_id);
CREATE TABLE IF NOT EXISTS news (
    item_id TEXT PRIMARY KEY,
    page_id INTEGER NOT NULL REFERENCES pages(page_id),
    title TEXT NOT NULL,
    summary TEXT NOT NULL,
    categories TEXT NOT NULL,
    generated_at TEXT NOT NULL,
    updated_at TEXT NOT NULL,
    source_revision_ids TEXT NOT NULL,
    final_rank REAL NOT NULL,
    rank_breakdown TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS news_by_page ON news(page_id, generated_at);
CREATE TABLE IF NOT EXISTS runs (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    run_id TEXT NOT NULL,
    window_start TEXT NOT NULL,
    window_end TEXT NOT NULL,
    pages_added INTEGER NOT NULL,
    edits_added INTEGER NOT NULL,
    authors_added INTEGER NOT NULL,
    report TEXT
);
CREATE INDEX IF NOT EXISTS runs_by_id ON runs(run_id);
"""


def _ts(dt: datetime) -> str:
    # fixed width so that text order is time order
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _dt(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%S.%fZ").replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class AuthorRecord:
    author_id: str
    total_edit_count: int
    per_category_edit_counts: dict[str, int]
    news_generating: bool


@dataclass(frozen=True)
class RankInputs:
    page_id: int
    news_gen_authors_on_page: int
    news_gen_authors_total: int
    authors_on_page: int
    authors_total: int
    domain_expert_authors_on_page: int
    edits_of_page_in_set: int
    pages_in_set: int
    edits_in_set: int
    views_yesterday: int = 0
    views_last_30_days_total: int = 0

    def __post_init__(self):
        if not (
            0 <= self.news_gen_authors_on_page
            <= min(self.news_gen_authors_total, self.authors_on_page)
        ):
            raise ValueError("news-generating authors on page out of range")
        if not 0 <= self.authors_on_page <= self.authors_total:
            raise ValueError("authors on page exceeds authors total")
        if not 0 <= self.domain_expert_authors_on_page <= self.authors_on_page:
            raise ValueError("domain experts exceed authors on page")
        if not 0 <= self.views_yesterday <= self.views_last_30_days_total:
            raise ValueError("views yesterday exceed the 30-day total")
        if self.edits_of_page_in_set < 0 or self.edits_in_set < self.edits_of_page_in_set:
            raise ValueError("working-set edit counts inconsistent")

    @property
    def mean_edits_per_page_in_set(self) -> Fraction:
        if self.pages_in_set == 0:
            return Fraction(0)
        return Fraction(self.edits_in_set, self.pages_in_set)


@dataclass(frozen=True)
class NewsItem:
    item_id: str
    page_id: int
    title: str
    summary: str
    categories: tuple[str, ...]
    generated_at: datetime
    updated_at: datetime
    source_revision_ids: tuple[int, ...]
    final_rank: float
    rank_breakdown: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.source_revision_ids:
            raise IntegrityFailure("news item needs at least one source revision")
        if self.updated_at < self.generated_at:
            raise IntegrityFailure("updated_at precedes generated_at")
        if not self.summary:
            raise IntegrityFailure("news item summary is empty")
        weighted = math.fsum(v * w for v, w in self.rank_breakdown.values())
        if not math.isclose(weighted, self.final_rank, rel_tol=1e-12, abs_tol=1e-12):
            raise IntegrityFailure(
                f"final_rank {self.final_rank} differs from breakdown sum {weighted}"
            )


class IngestStats(NamedTuple):
    pages_added: int
    edits_added: int
    authors_added: int


class SavedNews(NamedTuple):
    item: NewsItem
    created: bool


class GraphStore:
    def __init__(self, path: str | Path = ":memory:", *, dedup_horizon=DEFAULT_DEDUP_HORIZON):
        self.path = str(path)
        self.dedup_horizon = dedup_horizon
        if self.path != ":memory:":
            Path(self.path).parent.mkdir(parents=True, exist_ok=True)
        try:
            self._conn = sqlite3.connect(
                self.path, isolation_level=None, check_same_thread=False, timeout=30
            )
            self._conn.row_factory = sqlite3.Row
            if self.path != ":memory:":
                self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.execute("PRAGMA foreign_keys=ON")
            self._conn.executescript(SCHEMA)
        except sqlite3.Error as exc:
            raise StorageFailure(f"cannot open store at {self.path}: {exc}") from exc
        self._depth = 0

    def close(self):
        self._conn.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @contextmanager
    def transaction(self, write=True):
        """Group statements atomically; nested uses join the outer one."""
        if self._depth:
            self._depth += 1
            try:
                yield self._conn
            finally:
                self._depth -= 1
            return
        try:
            self._conn.execute("BEGIN IMMEDIATE" if write else "BEGIN")
        except sqlite3.Error as exc:
            raise StorageFailure(str(exc)) from exc
        self._depth = 1
        try:
            yield self._conn
        except BaseException:
            self._depth = 0
            self._conn.execute("ROLLBACK")
            raise
        self._depth = 0
        try:
            self._conn.execute("COMMIT")
        except sqlite3.Error as exc:
            self._conn.execute("ROLLBACK")
            raise StorageFailure(str(exc)) from exc

    def _read(self):
        return self.transaction(write=False)

    # -- writes ---------------------------------------------------------------

    def ingest_working_set(self, ws: WorkingSet) -> IngestStats:
        pages_added = edits_added = authors_added = 0
        try:
            with self.transaction() as db:
                for page in ws.pages.values():
                    cur = db.execute(
                        "INSERT OR IGNORE INTO pages(page_id, title) VALUES (?, ?)",
                        (page.page_id, page.title),
                    )
                    if cur.rowcount:
                        pages_added += 1
                    else:
                        db.execute(
                            "UPDATE pages SET title = ? WHERE page_id = ?",
                            (page.title, page.page_id),
                        )
                    db.executemany(
                        "INSERT OR IGNORE INTO page_categories(page_id, category) VALUES (?, ?)",
                        [(page.page_id, c) for c in page.categories],
                    )
                    for e in page.edits:
                        cur = db.execute(
                            "INSERT OR IGNORE INTO authors(author_id) VALUES (?)", (e.author,)
                        )
                        authors_added += cur.rowcount
                        cur = db.execute(
                            "INSERT OR IGNORE INTO edits VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                            (
                                e.revision_id,
                                e.page_id,
                                e.author,
                                _ts(e.timestamp),
                                e.namespace,
                                int(e.is_bot),
                                e.comment,
                                e.added_text,
                            ),
                        )
                        edits_added += cur.rowcount
                db.execute(
                    "INSERT INTO runs(run_id, window_start, window_end, pages_added,"
                    " edits_added, authors_added) VALUES (?, ?, ?, ?, ?, ?)",
                    (
                        ws.run_id,
                        _ts(ws.window_start),
                        _ts(ws.window_end),
                        pages_added,
                        edits_added,
                        authors_added,
                    ),
                )
        except sqlite3.Error as exc:
            raise StorageFailure(f"ingest of run {ws.run_id} failed: {exc}") from exc
        return IngestStats(pages_added, edits_added, authors_added)

    def save_run_report(self, run_id: str, report: dict):
        with self.transaction() as db:
            row = db.execute(
                "SELECT MAX(seq) FROM runs WHERE run_id = ?", (run_id,)
            ).fetchone()[0]
            if row is None:
                raise LookupFailure(f"unknown run {run_id}")
            db.execute(
                "UPDATE runs SET report = ? WHERE seq = ?",
                (json.dumps(report, sort_keys=True), row),
            )

    def save_news_item(self, item: NewsItem) -> SavedNews:
        """Insert ``item``, or fold it into an item for the same page that was
        generated within the dedup horizon."""
        with self.transaction() as db:
            if not db.execute("SELECT 1 FROM pages WHERE page_id = ?", (item.page_id,)).fetchone():
                raise IntegrityFailure(f"unknown page {item.page_id}")
            ids = list(item.source_revision_ids)
            found = {
                r[0]
                for r in db.execute(
                    f"SELECT revision_id FROM edits WHERE page_id = ? AND revision_id IN"
                    f" ({','.join('?' * len(ids))})",
                    [item.page_id, *ids],
                )
            }
            if missing := sorted(set(ids) - found):
                raise IntegrityFailure(
                    f"revisions {missing} are not stored edits of page {item.page_id}"
                )

            lo = _ts(item.generated_at - self.dedup_horizon)
            hi = _ts(item.generated_at + self.dedup_horizon)
            row = db.execute(
                "SELECT * FROM news WHERE page_id = ? AND generated_at BETWEEN ? AND ?"
                " ORDER BY generated_at DESC, item_id LIMIT 1",
                (item.page_id, lo, hi),
            ).fetchone()
            if row is None:
                db.execute(
                    "INSERT INTO news VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                    (
                        item.item_id,
                        item.page_id,
                        item.title,
                        item.summary,
                        json.dumps(list(item.categories)),
                        _ts(item.generated_at),
                        _ts(item.updated_at),
                        json.dumps(list(item.source_revision_ids)),
                        item.final_rank,
                        _dump_breakdown(item.rank_breakdown),
                    ),
                )
                return SavedNews(item, True)

            existing = _row_to_item(row)
            updated_at = max(existing.updated_at, item.updated_at)
            db.execute(
                "UPDATE news SET summary = ?, source_revision_ids = ?, final_rank = ?,"
                " rank_breakdown = ?, updated_at = ? WHERE item_id = ?",
                (
                    item.summary,
                    json.dumps(list(item.source_revision_ids)),
                    item.final_rank,
                    _dump_breakdown(item.rank_breakdown),
                    _ts(updated_at),
                    existing.item_id,
                ),
            )
            stored = _row_to_item(
                db.execute("SELECT * FROM news WHERE item_id = ?", (existing.item_id,)).fetchone()
            )
            return SavedNews(stored, False)

    # -- reads ------------------------------------------------------------------

    def run_count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM runs").fetchone()[0]

    def get_run(self, run_id: str) -> dict | None:
        row = self._conn.execute(
            "SELECT * FROM runs WHERE run_id = ? ORDER BY seq DESC LIMIT 1", (run_id,)
        ).fetchone()
        if row is None:
            return None
        out = {
            "run_id": row["run_id"],
            "window_start": _iso(row["window_start"]),
            "window_end": _iso(row["window_end"]),
            "pages_added": row["pages_added"],
            "edits_added": row["edits_added"],
            "authors_added": row["authors_added"],
            "report": json.loads(row["report"]) if row["report"] else None,
        }
        return out

    def has_page(self, page_id: int) -> bool:
        return bool(self._conn.execute("SELECT 1 FROM pages WHERE page_id = ?", (page_id,)).fetchone())

    def page_categories(self, page_id: int) -> list[str]:
        return [
            r[0]
            for r in self._conn.execute(
                "SELECT category FROM page_categories WHERE page_id = ? ORDER BY category",
                (page_id,),
            )
        ]

    def all_edits(self):
        """(revision_id, page_id, author_id, timestamp) for every stored edit."""
        return [
            (r[0], r[1], r[2], _dt(r[3]))
            for r in self._conn.execute(
                "SELECT revision_id, page_id, author_id, ts FROM edits ORDER BY revision_id"
            )
        ]

    def authors_total(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM authors").fetchone()[0]

    def news_generating_authors(self) -> set[str]:
        return {
            r[0]
            for r in self._conn.execute(
                "SELECT DISTINCT e.author_id FROM edits e"
                " JOIN news n ON n.page_id = e.page_id WHERE e.ts < n.generated_at"
            )
        }

    def gather_rank_inputs(
        self, page_id: int, ws: WorkingSet, stats: PageViewStats | None = None
    ) -> RankInputs:
        if page_id not in ws.pages:
            raise LookupFailure(f"page {page_id} is not in working set {ws.run_id}")
        with self._read() as db:
            if not db.execute("SELECT 1 FROM pages WHERE page_id = ?", (page_id,)).fetchone():
                raise LookupFailure(f"page {page_id} is not in the store")
            page_authors = {
                r[0]
                for r in db.execute(
                    "SELECT DISTINCT author_id FROM edits WHERE page_id = ?", (page_id,)
                )
            }
            news_gen = self.news_generating_authors()
            authors_total = db.execute("SELECT COUNT(*) FROM authors").fetchone()[0]
            experts = db.execute(
                """
                SELECT COUNT(DISTINCT e.author_id) FROM edits e
                WHERE e.page_id = :p AND EXISTS (
                    SELECT 1 FROM edits o
                    JOIN page_categories oc ON oc.page_id = o.page_id
                    JOIN page_categories pc ON pc.category = oc.category AND pc.page_id = :p
                    WHERE o.author_id = e.author_id AND o.page_id != :p
                )
                """,
                {"p": page_id},
            ).fetchone()[0]
        return RankInputs(
            page_id=page_id,
            news_gen_authors_on_page=len(page_authors & news_gen),
            news_gen_authors_total=len(news_gen),
            authors_on_page=len(page_authors),
            authors_total=authors_total,
            domain_expert_authors_on_page=experts,
            edits_of_page_in_set=len(ws.pages[page_id].edits),
            pages_in_set=len(ws.pages),
            edits_in_set=ws.edit_count,
            views_yesterday=stats.views_yesterday if stats else 0,
            views_last_30_days_total=stats.views_last_30_days_total if stats else 0,
        )

    def author_record(self, author_id: str) -> AuthorRecord:
        with self._read() as db:
            total = db.execute(
                "SELECT COUNT(*) FROM edits WHERE author_id = ?", (author_id,)
            ).fetchone()[0]
            per_cat = {
                r[0]: r[1]
                for r in db.execute(
                    "SELECT pc.category, COUNT(*) FROM edits e"
                    " JOIN page_categories pc ON pc.page_id = e.page_id"
                    " WHERE e.author_id = ? GROUP BY pc.category ORDER BY pc.category",
                    (author_id,),
                )
            }
            news_gen = bool(
                db.execute(
                    "SELECT 1 FROM edits e JOIN news n ON n.page_id = e.page_id"
                    " WHERE e.author_id = ? AND e.ts < n.generated_at LIMIT 1",
                    (author_id,),
                ).fetchone()
            )
        return AuthorRecord(author_id, total, per_cat, news_gen)

    def top_editors(self, k: int = 50) -> list[AuthorRecord]:
        if k < 0:
            raise ValueError("k must be non-negative")
        rows = self._conn.execute(
            "SELECT author_id FROM edits GROUP BY author_id"
            " ORDER BY COUNT(*) DESC, author_id ASC LIMIT ?",
            (k,),
        ).fetchall()
        return [self.author_record(r[0]) for r in rows]

    def category_top_experts(self, category: str, k: int = 5) -> list[AuthorRecord]:
        if k < 0:
            raise ValueError("k must be non-negative")
        rows = self._conn.execute(
            "SELECT e.author_id FROM edits e"
            " JOIN page_categories pc ON pc.page_id = e.page_id"
            " WHERE pc.category = ? GROUP BY e.author_id"
            " ORDER BY COUNT(*) DESC, e.author_id ASC LIMIT ?",
            (category, k),
        ).fetchall()
        return [self.author_record(r[0]) for r in rows]

    def shared_editorship_neighbors(self, page_id: int) -> list[tuple[int, int]]:
        if not self.has_page(page_id):
            raise LookupFailure(f"page {page_id} is not in the store")
        rows = self._conn.execute(
            """
            SELECT o.page_id, COUNT(DISTINCT o.author_id) AS shared FROM edits o
            WHERE o.page_id != :p
              AND o.author_id IN (SELECT author_id FROM edits WHERE page_id = :p)
            GROUP BY o.page_id ORDER BY shared DESC, o.page_id ASC
            """,
            {"p": page_id},
        )
        return [(r[0], r[1]) for r in rows]

    def get_news(self, item_id: str) -> NewsItem | None:
        row = self._conn.execute("SELECT * FROM news WHERE item_id = ?", (item_id,)).fetchone()
        return _row_to_item(row) if row else None

    def list_news(self, category: str | None = None, limit: int | None = None) -> list[NewsItem]:
        rows = self._conn.execute(
            "SELECT * FROM news ORDER BY updated_at DESC, item_id ASC"
        ).fetchall()
        items = [_row_to_item(r) for r in rows]
        if category is not None:
            items = [i for i in items if category in i.categories]
        if limit is not None:
            items = items[: max(limit, 0)]
        return items


def _iso(stored: str) -> str:
    return format_instant(_dt(stored))


def _dump_breakdown(breakdown):
    return json.dumps({k: [v, w] for k, (v, w) in breakdown.items()})


def _row_to_item(row) -> NewsItem:
    return NewsItem(
        item_id=row["item_id"],
        page_id=row["page_id"],
        title=row["title"],
        summary=row["summary"],
        categories=tuple(json.loads(row["categories"])),
        generated_at=_dt(row["generated_at"]),
        updated_at=_dt(row["updated_at"]),
        source_revision_ids=tuple(json.loads(row["source_revision_ids"])),
        final_rank=row["final_rank"],
        rank_breakdown={k: (v, w) for k, (v, w) in json.loads(row["rank_breakdown"]).items()},
    )
