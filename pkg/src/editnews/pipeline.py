"""One pass of the news algorithm, and a fixed-interval scheduler.

A run acquires edits, builds and stores the working set, ranks its pages,
turns the selected pages into news items and saves them together with the
run report in a single transaction.
"""

from __future__ import annotations

import logging
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta

from .clock import format_instant, utc_now
from .config import Config
from .errors import EmptyAggregateError, ProviderError
from .ingest import EditRecord, MediaWikiClient, build_working_set, fetch_recent_changes, replay_stream
from .news import aggregate_text, build_news_item, select_edits, summarize
from .ranker import select_news_pages
from .stats import PageViewStats, fetch_stats
from .store import GraphStore
from .transport import HostThrottle, PoliteClient

logger = logging.getLogger(__name__)


@dataclass
class RunReport:
    run_id: str
    started_at: datetime
    finished_at: datetime | None = None
    pages_considered: int = 0
    pages_selected: int = 0
    news_created: int = 0
    news_updated: int = 0
    degradations: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["started_at"] = format_instant(self.started_at)
        out["finished_at"] = format_instant(self.finished_at) if self.finished_at else None
        return out


def open_store(config: Config) -> GraphStore:
    return GraphStore(config.storage.path, dedup_horizon=config.dedup.horizon)


def make_client(config: Config) -> PoliteClient:
    throttle = HostThrottle(delay=config.ingest.host_delay_ms / 1000)
    return PoliteClient(throttle=throttle, retries=config.ingest.retries)


def acquire_edits(config: Config, now: datetime, http: PoliteClient | None = None) -> list[EditRecord]:
    ingest = config.ingest
    if ingest.stream_path:
        edits = replay_stream(ingest.stream_path)
    elif ingest.endpoint:
        window = (now - timedelta(minutes=ingest.window_minutes), now)
        client = MediaWikiClient(ingest.endpoint, http=http)
        edits = fetch_recent_changes(ingest.endpoint, window, ingest.filters, client=client)
    else:
        raise ValueError("config names neither ingest.stream_path nor ingest.endpoint")
    return ingest.filters.apply(edits)


def _page_stats(config, ws, now, http, report) -> dict[int, PageViewStats]:
    out = {}
    for page_id, page in ws.pages.items():
        if not config.stats.source:
            out[page_id] = PageViewStats.zeros(page.title, missing=False)
            continue
        try:
            out[page_id] = fetch_stats(page.title, config.stats.source, now=now, http=http)
        except ProviderError as exc:
            report.degradations.append(f"stats fallback for {page.title!r}: {exc}")
            out[page_id] = PageViewStats.zeros(page.title)
    return out


def run_pipeline(
    config: Config,
    *,
    now: datetime | None = None,
    edits: list[EditRecord] | None = None,
    store: GraphStore | None = None,
    http: PoliteClient | None = None,
    run_id: str | None = None,
) -> RunReport:
    """Run the news algorithm once.

    ``now`` pins the run clock (used for the stats window and for the
    generation time of news items); ``edits`` bypasses acquisition.
    """
    pinned = now is not None
    now = now or utc_now()
    run_id = run_id or uuid.uuid4().hex
    report = RunReport(run_id=run_id, started_at=now)
    owns_store = store is None
    store = store if store is not None else open_store(config)
    owns_http = http is None and (config.ingest.endpoint or config.stats.source or config.summarizer.kind == "remote")
    if owns_http:
        http = make_client(config)
    try:
        if edits is None:
            edits = acquire_edits(config, now, http)
        else:
            edits = config.ingest.filters.apply(edits)
        window = (now - timedelta(minutes=config.ingest.window_minutes), now)
        ws = build_working_set(
            edits, run_id, window=window, max_pages=config.ingest.max_pages
        )
        store.ingest_working_set(ws)
        report.pages_considered = len(ws)

        stats = _page_stats(config, ws, now, http, report)
        decisions = select_news_pages(store, ws, config.ranks, stats) if len(ws) else []
        report.pages_selected = len(decisions)

        rule = config.selection
        top = {a.author_id for a in store.top_editors(rule.top_editor_k)}
        items = []
        for decision in decisions:
            page = ws.pages[decision.page_id]
            experts = {
                a.author_id
                for c in page.categories
                for a in store.category_top_experts(c, rule.expert_k)
            }
            chosen = select_edits(page.edits, rule, top, experts)
            try:
                text = aggregate_text(chosen)
            except EmptyAggregateError:
                logger.info("page %s selected but has no usable edit text", page.page_id)
                continue
            summary = summarize(text, config.summarizer, http=http, degradations=report.degradations)
            items.append(build_news_item(page, decision, summary, chosen, now))

        with store.transaction():
            for item in items:
                if store.save_news_item(item).created:
                    report.news_created += 1
                else:
                    report.news_updated += 1
            report.finished_at = now if pinned else utc_now()
            store.save_run_report(run_id, report.to_dict())
        logger.info(
            "run %s: %d pages, %d selected, %d created, %d updated",
            run_id,
            report.pages_considered,
            report.pages_selected,
            report.news_created,
            report.news_updated,
        )
        return report
    finally:
        if owns_http and http is not None:
            http.close()
        if owns_store:
            store.close()


class Scheduler:
    """Fixed-interval trigger. A tick that arrives while a run is still in
    progress is skipped rather than queued."""

    def __init__(self, job, interval: float):
        self.job = job
        self.interval = interval
        self.runs = 0
        self.skipped = 0
        self._busy = threading.Lock()
        self._threads: list[threading.Thread] = []

    def _work(self):
        try:
            self.job()
            self.runs += 1
        except Exception:
            logger.exception("scheduled run failed")
        finally:
            self._busy.release()

    def tick(self) -> bool:
        if not self._busy.acquire(blocking=False):
            self.skipped += 1
            logger.info("previous run still in progress; skipping tick")
            return False
        t = threading.Thread(target=self._work, daemon=True)
        self._threads.append(t)
        t.start()
        return True

    def run(self, stop: threading.Event):
        self.tick()
        while not stop.wait(self.interval):
            self.tick()
        for t in self._threads:
            t.join()
