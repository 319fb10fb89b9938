"""From a selected page to a news item: edit selection, text aggregation,
summarization and item assembly."""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from typing import Iterable, Literal

from .errors import EmptyAggregateError, IntegrityFailure, ProviderError, TransportError
from .ingest import EditRecord, PageEntry
from .ranker import SelectionDecision
from .store import NewsItem
from .text import STOPWORDS, split_sentences, tokenize
from .transport import PoliteClient

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EditSelectionRule:
    min_chars: int = 50
    top_editor_k: int = 50
    expert_k: int = 5
    mode: Literal["any", "all"] = "any"

    def __post_init__(self):
        if self.min_chars < 0 or self.top_editor_k < 0 or self.expert_k < 0:
            raise ValueError("selection parameters must be non-negative")
        if self.mode not in ("any", "all"):
            raise ValueError(f"mode must be 'any' or 'all', not {self.mode!r}")


@dataclass(frozen=True)
class SummarizerSpec:
    kind: Literal["local", "remote"] = "local"
    sentence_limit: int = 7
    endpoint: str | None = None
    key: str | None = None

    def __post_init__(self):
        if self.sentence_limit < 1:
            raise ValueError("sentence_limit must be at least 1")
        if self.kind not in ("local", "remote"):
            raise ValueError(f"unknown summarizer kind {self.kind!r}")


def select_edits(
    edits: Iterable[EditRecord],
    rule: EditSelectionRule,
    top_editors: set[str],
    experts: set[str],
) -> list[EditRecord]:
    def checks(e):
        return (
            e.author in top_editors,
            e.author in experts,
            e.added_char_count > rule.min_chars,
        )

    combine = any if rule.mode == "any" else all
    return [e for e in edits if combine(checks(e))]


_REF = re.compile(r"<ref[^>/]*/>|<ref[^>]*>.*?</ref>", re.S | re.I)
_TEMPLATE = re.compile(r"\{\{[^{}]*\}\}")
_TABLE = re.compile(r"\{\|.*?\|\}", re.S)
_HIDDEN_LINK = re.compile(r"\[\[(?:Category|File|Image):[^\[\]]*\]\]", re.I)
_PIPED_LINK = re.compile(r"\[\[[^\[\]|]*\|([^\[\]]*)\]\]")
_LINK = re.compile(r"\[\[([^\[\]]*)\]\]")
_EXT_LINK = re.compile(r"\[(?:https?:)?//[^\s\]]+\s*([^\]]*)\]")
_QUOTES = re.compile(r"'{2,}")
_HTML = re.compile(r"<[^>]+>")
_SPACES = re.compile(r"[ \t]+")


def clean_wikitext(text: str) -> str:
    """Strip link brackets, templates, ref tags and emphasis quotes while
    keeping the visible text."""
    text = _REF.sub("", text)
    while True:
        stripped = _TEMPLATE.sub("", text)
        if stripped == text:
            break
        text = stripped
    text = _TABLE.sub("", text)
    text = _HIDDEN_LINK.sub("", text)
    text = _PIPED_LINK.sub(r"\1", text)
    text = _LINK.sub(r"\1", text)
    text = _EXT_LINK.sub(r"\1", text)
    text = _QUOTES.sub("", text)
    text = _HTML.sub("", text)
    lines = (_SPACES.sub(" ", line).strip() for line in text.splitlines())
    return "\n".join(line for line in lines if line)


def aggregate_text(edits: Iterable[EditRecord]) -> str:
    ordered = sorted(edits, key=lambda e: (e.timestamp, e.revision_id))
    if not ordered:
        raise EmptyAggregateError("no edits to aggregate")
    blocks = [b for b in (clean_wikitext(e.added_text) for e in ordered) if b]
    if not blocks:
        raise EmptyAggregateError("edits contain no visible text")
    return "\n\n".join(blocks)


def sentence_scores(sentences: list[str]) -> list[Fraction]:
    """Per sentence: summed document frequency of its non-stopword terms,
    divided by its word count."""
    tokens = [tokenize(s) for s in sentences]
    freq = Counter(t for toks in tokens for t in toks if t not in STOPWORDS)
    scores = []
    for toks in tokens:
        if not toks:
            scores.append(Fraction(0))
            continue
        scores.append(Fraction(sum(freq[t] for t in toks if t not in STOPWORDS), len(toks)))
    return scores


def summarize_local(text: str, sentence_limit: int = 7) -> str:
    sentences = split_sentences(text)
    if len(sentences) <= sentence_limit:
        return text
    scores = sentence_scores(sentences)
    best = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))[:sentence_limit]
    return " ".join(sentences[i] for i in sorted(best))


def summarize_remote(text: str, spec: SummarizerSpec, http: PoliteClient | None = None) -> str:
    """Call an SMMRY-style API: text in ``sm_api_input``, length in
    ``SM_LENGTH``, summary back in ``sm_api_content``."""
    if not spec.endpoint:
        raise ProviderError("remote summarizer has no endpoint")
    http = http if http is not None else PoliteClient()
    params = {"SM_LENGTH": str(spec.sentence_limit)}
    if spec.key:
        params["SM_API_KEY"] = spec.key
    try:
        response = http.post(spec.endpoint, params=params, data={"sm_api_input": text})
    except TransportError as exc:
        raise ProviderError(f"summarizer unreachable: {exc}") from exc
    if response.status_code >= 400:
        raise ProviderError(f"summarizer returned HTTP {response.status_code}")
    try:
        body = response.json()
    except ValueError:
        raise ProviderError("summarizer response is not JSON") from None
    if "sm_api_error" in body:
        raise ProviderError(f"summarizer error: {body.get('sm_api_message', body['sm_api_error'])}")
    summary = str(body.get("sm_api_content", "")).strip()
    if not summary:
        raise ProviderError("summarizer returned an empty summary")
    return summary


def summarize(
    text: str,
    spec: SummarizerSpec = SummarizerSpec(),
    *,
    http: PoliteClient | None = None,
    degradations: list[str] | None = None,
) -> str:
    if not text.strip():
        raise ValueError("cannot summarize empty text")
    if spec.kind == "remote":
        try:
            return summarize_remote(text, spec, http)
        except ProviderError as exc:
            logger.warning("falling back to local summarizer: %s", exc)
            if degradations is not None:
                degradations.append(f"summarizer fallback: {exc}")
    return summarize_local(text, spec.sentence_limit)


def news_item_id(page_id: int, generated_at: datetime) -> str:
    return f"{page_id}-{generated_at:%Y%m%dT%H%M%SZ}"


def build_news_item(
    page: PageEntry,
    decision: SelectionDecision,
    summary: str,
    edits_used: Iterable[EditRecord],
    now: datetime,
) -> NewsItem:
    if not decision.selected:
        raise ValueError(f"page {page.page_id} was not selected")
    if decision.page_id is not None and decision.page_id != page.page_id:
        raise IntegrityFailure("decision belongs to a different page")
    edits_used = tuple(edits_used)
    revisions = tuple(e.revision_id for e in edits_used)
    if any(e.page_id != page.page_id for e in edits_used):
        raise IntegrityFailure("edit from another page in news provenance")
    return NewsItem(
        item_id=news_item_id(page.page_id, now),
        page_id=page.page_id,
        title=page.title,
        summary=summary,
        categories=tuple(page.categories),
        generated_at=now,
        updated_at=now,
        source_revision_ids=revisions,
        final_rank=float(decision.weighted_total),
        rank_breakdown=decision.breakdown(),
    )
