"""Page ranks and the weighted-threshold selection rule.

Each rank is a named function of :class:`RankInputs`. Values and weighted
totals are kept as exact fractions so that the threshold comparison does
not depend on summation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .errors import ConfigError
from .ingest import WorkingSet
from .stats import PageViewStats
from .store import GraphStore, RankInputs


def _ratio(num, den) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def rank_authors_with_news(inputs: RankInputs) -> Fraction:
    """Share of all news-generating authors who edited this page."""
    return _ratio(inputs.news_gen_authors_on_page, inputs.news_gen_authors_total)


def rank_common_authors(inputs: RankInputs) -> Fraction:
    return _ratio(inputs.authors_on_page, inputs.authors_total)


def rank_domain_experts(inputs: RankInputs) -> Fraction:
    """Authors of the page who also edited another page in one of its
    categories, over all authors."""
    return _ratio(inputs.domain_expert_authors_on_page, inputs.authors_total)


def rank_recent_changes(inputs: RankInputs) -> Fraction:
    """Edits of this page relative to the mean edits per page in the set."""
    mean = inputs.mean_edits_per_page_in_set
    if mean == 0:
        raise ValueError("recent-changes rank is undefined on an empty working set")
    return Fraction(inputs.edits_of_page_in_set) / mean


def rank_relevance(inputs: RankInputs) -> Fraction:
    return _ratio(inputs.views_yesterday, inputs.views_last_30_days_total)


RankFn = Callable[[RankInputs], Fraction]

RANKS: dict[str, RankFn] = {
    "authors_with_news": rank_authors_with_news,
    "common_authors": rank_common_authors,
    "domain_experts": rank_domain_experts,
    "recent_changes": rank_recent_changes,
    "relevance": rank_relevance,
}


def register_rank(name: str, fn: RankFn):
    """Make an additional rank available to :class:`RankConfig`."""
    RANKS[name] = fn


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # shortest decimal repr, so 0.1 in a config file means 1/10
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class RankConfig:
    weights: Mapping[str, Fraction] = field(
        default_factory=lambda: {name: Fraction(1) for name in RANKS}
    )
    threshold: Fraction = Fraction(1)
    enabled: tuple[str, ...] = tuple(RANKS)

    def __post_init__(self):
        weights = {k: as_fraction(v) for k, v in self.weights.items()}
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "threshold", as_fraction(self.threshold))
        object.__setattr__(self, "enabled", tuple(self.enabled))
        for name in self.enabled:
            if name not in weights:
                raise ConfigError(f"enabled rank {name!r} has no weight")
            if weights[name] < 0:
                raise ConfigError(f"weight of {name!r} is negative")


@dataclass(frozen=True)
class SelectionDecision:
    page_id: int
    rank_values: dict[str, Fraction]
    weighted_total: Fraction
    selected: bool
    weights: dict[str, Fraction] = field(default_factory=dict)

    def breakdown(self) -> dict[str, tuple[float, float]]:
        return {
            name: (float(value), float(self.weights[name]))
            for name, value in self.rank_values.items()
            if name in self.weights
        }


def combine(values: Mapping[str, object], cfg: RankConfig, page_id=None) -> SelectionDecision:
    """Weighted sum over the enabled ranks, selected when strictly above
    the threshold."""
    missing = [name for name in cfg.enabled if name not in values]
    if missing:
        raise ConfigError(f"missing values for enabled ranks: {missing}")
    used = {name: as_fraction(values[name]) for name in cfg.enabled}
    weights = {name: cfg.weights[name] for name in cfg.enabled}
    total = sum((used[n] * weights[n] for n in cfg.enabled), Fraction(0))
    return SelectionDecision(
        page_id=page_id,
        rank_values=used,
        weighted_total=total,
        selected=total > cfg.threshold,
        weights=weights,
    )


def compute_ranks(inputs: RankInputs, names) -> dict[str, Fraction]:
    unknown = [n for n in names if n not in RANKS]
    if unknown:
        raise ConfigError(f"unknown ranks: {unknown}")
    return {name: RANKS[name](inputs) for name in names}


def rank_pages(
    store: GraphStore,
    ws: WorkingSet,
    cfg: RankConfig,
    stats: Mapping[int, PageViewStats] | None = None,
) -> list[SelectionDecision]:
    """One decision per page of the working set, in page id order."""
    stats = stats or {}
    decisions = []
    for page_id in sorted(ws.pages):
        inputs = store.gather_rank_inputs(page_id, ws, stats.get(page_id))
        decisions.append(combine(compute_ranks(inputs, cfg.enabled), cfg, page_id))
    return decisions


def select_news_pages(
    store: GraphStore,
    ws: WorkingSet,
    cfg: RankConfig,
    stats: Mapping[int, PageViewStats] | None = None,
) -> list[SelectionDecision]:
    """Selected decisions only, best first (ties by page id)."""
    chosen = [d for d in rank_pages(store, ws, cfg, stats) if d.selected]
    return sorted(chosen, key=lambda d: (-d.weighted_total, d.page_id))
