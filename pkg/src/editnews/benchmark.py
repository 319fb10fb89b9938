"""Overlap and freshness of the generated feed against conventional news
feeds.

Stories are reduced to keyword sets; two stories match when the overlap of
their keyword sets clears a threshold. Each story takes part in at most one
match.
"""

from __future__ import annotations

import html
import json
import logging
import re
import statistics
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from email.utils import parsedate_to_datetime
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Literal

from .clock import format_instant, parse_instant
from .errors import ParseError, TransportError
from .text import STOPWORDS, tokenize
from .transport import PoliteClient

logger = logging.getLogger(__name__)

MatchClass = Literal["none", "weak", "strong"]
_CLASS_ORDER = {"none": 0, "weak": 1, "strong": 2}


@dataclass(frozen=True)
class FeedStory:
    source_name: str
    story_id: str
    title: str
    body_or_description: str
    published_at: datetime
    keywords: frozenset[str] = frozenset()


@dataclass(frozen=True)
class MatchThresholds:
    minimum: Fraction = Fraction("0.25")
    strong: Fraction = Fraction("0.33")

    def __post_init__(self):
        object.__setattr__(self, "minimum", Fraction(str(self.minimum)))
        object.__setattr__(self, "strong", Fraction(str(self.strong)))
        if not 0 <= self.minimum <= self.strong <= 1:
            raise ValueError("thresholds must satisfy 0 <= minimum <= strong <= 1")


@dataclass(frozen=True)
class MatchPair:
    left: FeedStory
    right: FeedStory
    strength: Fraction
    classification: MatchClass

    @property
    def time_delta(self) -> timedelta:
        """Positive when the left story was published first."""
        return self.right.published_at - self.left.published_at

    def swapped(self) -> "MatchPair":
        return replace(self, left=self.right, right=self.left)


@dataclass(frozen=True)
class OverlapReport:
    pairs: list[MatchPair]
    size_a: int
    size_b: int

    @property
    def overlap_pct_a(self) -> float:
        return 100 * len(self.pairs) / self.size_a if self.size_a else 0.0

    @property
    def overlap_pct_b(self) -> float:
        return 100 * len(self.pairs) / self.size_b if self.size_b else 0.0


@dataclass(frozen=True)
class FreshnessSummary:
    deltas: list[timedelta] = field(default_factory=list)
    mean: timedelta | None = None
    median: timedelta | None = None
    left_first: int = 0
    right_first: int = 0
    simultaneous: int = 0


# -- feed reading -------------------------------------------------------------

_HTML_TAG = re.compile(r"<[^>]+>")


def _plain(text: str | None) -> str:
    if not text:
        return ""
    return " ".join(html.unescape(_HTML_TAG.sub(" ", text)).split())


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child_text(elem, *names):
    for child in elem:
        if _local(child.tag) in names and (child.text or "").strip():
            return child.text.strip()
    return None


def _child_link(elem):
    for child in elem:
        if _local(child.tag) == "link":
            href = child.get("href")
            if href:
                return href
            if child.text and child.text.strip():
                return child.text.strip()
    return None


def _parse_date(text: str | None) -> datetime | None:
    if not text:
        return None
    try:
        dt = parsedate_to_datetime(text)
    except (TypeError, ValueError):
        dt = None
    if dt is None:
        try:
            return parse_instant(text)
        except ValueError:
            return None
    return parse_instant(dt)


def _parse_xml(text: str, source_name: str):
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"unparseable feed document: {exc}", field="document") from None
    entries = [e for e in root.iter() if _local(e.tag) in ("item", "entry")]
    if source_name is None:
        channel = next((e for e in root.iter() if _local(e.tag) in ("channel", "feed")), root)
        source_name = _child_text(channel, "title") or "feed"
    stories, dropped = [], 0
    for entry in entries:
        published = _parse_date(_child_text(entry, "pubDate", "published", "date", "updated"))
        if published is None:
            dropped += 1
            continue
        title = _plain(_child_text(entry, "title"))
        body = _plain(_child_text(entry, "description", "summary", "content", "encoded"))
        story_id = _child_text(entry, "guid", "id") or _child_link(entry) or title
        stories.append(FeedStory(source_name, story_id, title, body, published))
    return stories, dropped


def _parse_engine_feed(data, source_name: str):
    if not isinstance(data, list):
        raise ParseError("engine feed must be a JSON array", field="document")
    stories = []
    for obj in data:
        try:
            stories.append(
                FeedStory(
                    source_name or "editnews",
                    str(obj["id"]),
                    obj["title"],
                    obj["summary"],
                    parse_instant(obj["generated_at"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad feed entry: {exc}", field="generated_at") from None
    return stories, 0


def parse_feed(text: str, source_name: str | None = None) -> tuple[list[FeedStory], int]:
    """Parse RSS 2.0, Atom or the engine's JSON feed.

    Returns the stories and the number of undated entries that were dropped.
    Repeated story ids keep their first entry.
    """
    stripped = text.lstrip()
    if not stripped:
        return [], 0
    if stripped[0] in "[{":
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ParseError(f"unparseable JSON feed: {exc.msg}", field="document") from None
        stories, dropped = _parse_engine_feed(data, source_name)
    else:
        stories, dropped = _parse_xml(stripped, source_name)
    seen, unique = set(), []
    for s in stories:
        if s.story_id not in seen:
            seen.add(s.story_id)
            unique.append(s)
    return unique, dropped


def fetch_feed(source: str | Path, *, source_name=None, http: PoliteClient | None = None):
    source = str(source)
    if source.startswith(("http://", "https://")):
        http = http if http is not None else PoliteClient()
        response = http.get(source)
        if response.status_code >= 400:
            raise TransportError("feed fetch failed", status=response.status_code, url=source)
        text = response.text
    else:
        text = Path(source).read_text(encoding="utf-8")
    stories, dropped = parse_feed(text, source_name)
    if dropped:
        logger.warning("%s: dropped %d undated entries", source, dropped)
    return stories


# -- keywords and matching ------------------------------------------------------


def extract_keywords(text: str, n: int = 10, stopwords=STOPWORDS) -> frozenset[str]:
    """The ``n`` most frequent non-stopword terms; ties go alphabetically."""
    if n < 1:
        raise ValueError("n must be at least 1")
    counts = Counter(t for t in tokenize(text) if t not in stopwords)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return frozenset(term for term, _ in ranked[:n])


def with_keywords(stories: Iterable[FeedStory], n: int = 10, stopwords=STOPWORDS):
    return [
        replace(s, keywords=extract_keywords(f"{s.title} {s.body_or_description}", n, stopwords))
        for s in stories
    ]


def match_strength(ka, kb, mode: Literal["jaccard", "min"] = "jaccard") -> Fraction:
    """Shared keywords over all keywords of both stories (or, with
    ``mode="min"``, over the smaller set)."""
    ka, kb = set(ka), set(kb)
    shared = len(ka & kb)
    if mode == "jaccard":
        den = len(ka | kb)
    elif mode == "min":
        den = min(len(ka), len(kb))
    else:
        raise ValueError(f"unknown strength mode {mode!r}")
    return Fraction(shared, den) if den else Fraction(0)


def classify_match(strength, thresholds: MatchThresholds = MatchThresholds()) -> MatchClass:
    strength = Fraction(str(strength)) if isinstance(strength, float) else Fraction(strength)
    if strength < thresholds.minimum:
        return "none"
    if strength <= thresholds.strong:
        return "weak"
    return "strong"


def _feed_key(feed):
    return sorted(
        (s.source_name, s.story_id, s.title, s.body_or_description, format_instant(s.published_at))
        for s in feed
    )


def _greedy_pairs(feed_a, feed_b, min_class, thresholds, mode):
    floor = _CLASS_ORDER[min_class]
    candidates = []
    for a in feed_a:
        for b in feed_b:
            strength = match_strength(a.keywords, b.keywords, mode)
            cls = classify_match(strength, thresholds)
            if _CLASS_ORDER[cls] >= floor and strength > 0:
                candidates.append((strength, a, b, cls))
    candidates.sort(key=lambda c: (-c[0], c[1].story_id, c[2].story_id))
    used_a, used_b, pairs = set(), set(), []
    for strength, a, b, cls in candidates:
        if a.story_id in used_a or b.story_id in used_b:
            continue
        used_a.add(a.story_id)
        used_b.add(b.story_id)
        pairs.append(MatchPair(a, b, strength, cls))
    return pairs


def compute_overlap(
    feed_a: list[FeedStory],
    feed_b: list[FeedStory],
    min_class: Literal["weak", "strong"] = "strong",
    thresholds: MatchThresholds = MatchThresholds(),
    mode: Literal["jaccard", "min"] = "jaccard",
) -> OverlapReport:
    """Score every cross pair and keep a one-to-one greedy matching.

    The greedy pass always runs over the feeds in a fixed canonical order,
    so swapping the arguments only swaps the sides of the result.
    """
    if min_class not in ("weak", "strong"):
        raise ValueError("min_class must be 'weak' or 'strong'")
    if _feed_key(feed_a) <= _feed_key(feed_b):
        pairs = _greedy_pairs(feed_a, feed_b, min_class, thresholds, mode)
    else:
        pairs = [p.swapped() for p in _greedy_pairs(feed_b, feed_a, min_class, thresholds, mode)]
    return OverlapReport(pairs=pairs, size_a=len(feed_a), size_b=len(feed_b))


def freshness_report(pairs: Iterable[MatchPair]) -> FreshnessSummary:
    deltas = [p.time_delta for p in pairs]
    if not deltas:
        return FreshnessSummary()
    zero = timedelta(0)
    return FreshnessSummary(
        deltas=deltas,
        mean=sum(deltas, zero) / len(deltas),
        median=statistics.median(deltas),
        left_first=sum(d > zero for d in deltas),
        right_first=sum(d < zero for d in deltas),
        simultaneous=sum(d == zero for d in deltas),
    )


# -- reporting ------------------------------------------------------------------


def _seconds(delta):
    return None if delta is None else delta.total_seconds()


def report_to_dict(report: OverlapReport, freshness: FreshnessSummary | None = None) -> dict:
    freshness = freshness if freshness is not None else freshness_report(report.pairs)
    return {
        "size_left": report.size_a,
        "size_right": report.size_b,
        "overlap_pct_left": report.overlap_pct_a,
        "overlap_pct_right": report.overlap_pct_b,
        "pairs": [
            {
                "left": {"source": p.left.source_name, "id": p.left.story_id, "title": p.left.title},
                "right": {"source": p.right.source_name, "id": p.right.story_id, "title": p.right.title},
                "strength": float(p.strength),
                "classification": p.classification,
                "time_delta_seconds": p.time_delta.total_seconds(),
            }
            for p in report.pairs
        ],
        "freshness": {
            "mean_seconds": _seconds(freshness.mean),
            "median_seconds": _seconds(freshness.median),
            "left_first": freshness.left_first,
            "right_first": freshness.right_first,
            "simultaneous": freshness.simultaneous,
        },
    }


def _hours(delta: timedelta) -> str:
    return f"{delta.total_seconds() / 3600:+.2f}h"


def format_table(report: OverlapReport, freshness: FreshnessSummary | None = None) -> str:
    freshness = freshness if freshness is not None else freshness_report(report.pairs)
    lines = [
        f"{'strength':>8}  {'class':<6}  {'delta':>8}  left / right",
        "-" * 72,
    ]
    for p in report.pairs:
        lines.append(
            f"{float(p.strength):>8.3f}  {p.classification:<6}  {_hours(p.time_delta):>8}  "
            f"{p.left.title[:28]} / {p.right.title[:28]}"
        )
    lines.append("-" * 72)
    lines.append(
        f"overlap left {report.overlap_pct_a:.1f}% of {report.size_a}, "
        f"right {report.overlap_pct_b:.1f}% of {report.size_b}"
    )
    if freshness.mean is not None:
        lines.append(
            f"freshness mean {_hours(freshness.mean)}, median {_hours(freshness.median)}, "
            f"left first {freshness.left_first}, right first {freshness.right_first}, "
            f"same time {freshness.simultaneous}"
        )
    return "\n".join(lines)
