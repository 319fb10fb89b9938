"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line (visible even under
pytest's output capture). Run just this module with::

    pytest tests/test_acceptance.py -v
"""

import random
import time
from datetime import timedelta
from fractions import Fraction

import pytest

from conftest import FIXTURES, G1, REPLAY_CLOCK, TEST_FIXTURES, g1_views, make_edit, replay_config
from editnews.benchmark import (
    MatchThresholds,
    classify_match,
    compute_overlap,
    fetch_feed,
    freshness_report,
    match_strength,
    with_keywords,
)
from editnews.feed import export_feed
from editnews.news import EditSelectionRule, select_edits
from editnews.pipeline import run_pipeline
from editnews.ranker import RANKS, RankConfig, combine, compute_ranks
from editnews.store import GraphStore
from oracles import brute_rank_inputs, brute_ranks

FIELDS = (
    "news_gen_authors_on_page",
    "news_gen_authors_total",
    "authors_on_page",
    "authors_total",
    "domain_expert_authors_on_page",
    "edits_of_page_in_set",
    "mean_edits_per_page_in_set",
    "views_yesterday",
    "views_last_30_days_total",
)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, detail

    return emit


def test_criterion_1_rank_oracle(report):
    start = time.perf_counter()
    mismatches = []
    with GraphStore() as store:
        g1 = G1(store)
        assert len(g1.ws) == 6 and store.authors_total() == 8 and len(g1.raw_edits) <= 50
        for pid, page in g1.ws.pages.items():
            got = store.gather_rank_inputs(pid, g1.ws, g1.stats[pid])
            want = brute_rank_inputs(g1.raw_edits, g1.raw_news, g1.raw_edits, pid, g1_views(page.title))
            for f in FIELDS:
                if getattr(got, f) != want[f]:
                    mismatches.append((pid, f, getattr(got, f), want[f]))
            ranks = compute_ranks(got, RANKS)
            for name, value in brute_ranks(want).items():
                if ranks[name] != value or abs(float(ranks[name]) - float(value)) > 1e-12:
                    mismatches.append((pid, name, ranks[name], value))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 5
    report(1, "rank inputs and rank values equal a brute-force recount on G1", ok,
           f"{len(mismatches)} mismatches, {elapsed:.2f}s")


def test_criterion_2_threshold_properties(report):
    rng = random.Random(20130520)
    names = list(RANKS)

    def frac(hi, den):
        return Fraction(rng.randint(0, hi * den), den)

    violations = cases = 0
    for _ in range(1500):
        values = {n: frac(3, rng.choice([1, 4, 20, 60])) for n in names}
        weights = {n: frac(5, rng.choice([1, 2, 10])) for n in names}
        t = Fraction(rng.randint(-20, 120), 20)
        cfg = RankConfig(weights=weights, threshold=t)
        base = combine(values, cfg)

        bumped = dict(values)
        n = rng.choice(names)
        bumped[n] += frac(2, 30)
        if base.selected and not combine(bumped, cfg).selected:
            violations += 1

        extra = combine(
            {**values, "extra": frac(3, 7)},
            RankConfig(weights={**weights, "extra": 0}, threshold=t, enabled=tuple(names) + ("extra",)),
        )
        if extra.selected != base.selected:
            violations += 1

        c = Fraction(rng.randint(1, 1000), rng.randint(1, 100))
        scaled = combine(values, RankConfig(weights={k: w * c for k, w in weights.items()}, threshold=t * c))
        if scaled.selected != base.selected:
            violations += 1
        cases += 1
    report(2, "monotonicity, weight-0 neutrality, scale invariance", violations == 0 and cases >= 1000,
           f"{cases} cases, {violations} violations")


def test_criterion_3_boundary_pins(report):
    rule = EditSelectionRule()
    e50 = make_edit(1, author="anon", text="a" * 50)
    e51 = make_edit(2, author="anon", text="a" * 51)
    length_ok = select_edits([e50, e51], rule, set(), set()) == [e51]
    pins = [classify_match(v) for v in (0.24, 0.28, 0.40)]
    t = MatchThresholds()
    eps = Fraction(1, 10**12)
    flips = [classify_match(x) for x in (t.minimum - eps, t.minimum, t.strong, t.strong + eps)]
    ok = length_ok and pins == ["none", "weak", "strong"] and flips == ["none", "weak", "weak", "strong"]
    report(3, "50/51-char edit rule and 0.25/0.33 match classes", ok, f"pins={pins}, flips={flips}")


def test_criterion_4_match_strength(report):
    rng = random.Random(7)
    vocab = list("abcdefghijkl")
    failures = 0
    for _ in range(1000):
        a = set(rng.sample(vocab, rng.randint(0, 6)))
        b = set(rng.sample(vocab, rng.randint(0, 6)))
        s = match_strength(a, b)
        if s != match_strength(b, a) or not 0 <= s <= 1:
            failures += 1
        if a and b and (s == 1) != (a == b):
            failures += 1
        if a and match_strength(a, set(a)) != 1:
            failures += 1
    hand = match_strength({"obama", "syria", "un", "vote"}, {"syria", "un", "ceasefire", "talks", "vote"})
    ok = failures == 0 and hand == Fraction(3, 6)
    report(4, "match strength symmetry, range, identity, hand-scored pair", ok, f"hand pair = {hand}")


def test_criterion_5_replay_determinism(report, tmp_path):
    start = time.perf_counter()
    exports = []
    for i in range(2):
        cfg = replay_config(tmp_path / f"run{i}")
        run_pipeline(cfg, now=REPLAY_CLOCK)
        with GraphStore(cfg.storage.path) as store:
            exports.append(export_feed(store))
    golden = (FIXTURES / "golden_feed.json").read_text(encoding="utf-8")
    elapsed = time.perf_counter() - start
    ok = exports[0] == exports[1] == golden and elapsed < 30
    report(5, "replay export byte-identical across runs and to the golden file", ok,
           f"{len(exports[0])} bytes, {elapsed:.2f}s")


def test_criterion_6_update_not_duplicate(report, tmp_path):
    cfg = replay_config(tmp_path)
    run_pipeline(cfg, now=REPLAY_CLOCK)
    with GraphStore(cfg.storage.path) as store:
        before = {i.item_id: i.updated_at for i in store.list_news()}
    cfg.ingest.stream_path = str(FIXTURES / "stream_update.jsonl")
    later = REPLAY_CLOCK + timedelta(minutes=7)
    r = run_pipeline(cfg, now=later)
    with GraphStore(cfg.storage.path) as store:
        after = {i.item_id: i.updated_at for i in store.list_news()}
    advanced = [k for k in after if after[k] > before.get(k, after[k])]
    ok = (r.news_created, r.news_updated) == (0, 1) and after.keys() == before.keys() and len(advanced) == 1
    report(6, "three extra edits update the existing item instead of duplicating it", ok,
           f"created={r.news_created}, updated={r.news_updated}, advanced={advanced}")


def test_criterion_7_overlap(report):
    left = with_keywords(fetch_feed(TEST_FIXTURES / "feeds" / "left10.xml"))
    right = with_keywords(fetch_feed(TEST_FIXTURES / "feeds" / "right10.xml"))
    r = compute_overlap(left, right, "strong")
    pairs = {(p.left.story_id, p.right.story_id) for p in r.pairs}
    planted = {("L0", "R1"), ("L1", "R2"), ("L2", "R3"), ("L3", "R4")}
    ok = pairs == planted and (r.overlap_pct_a, r.overlap_pct_b) == (40.0, 40.0)
    report(7, "10x10 fixture feeds give 40%/40% with exactly the planted pairs", ok,
           f"{r.overlap_pct_a:.0f}%/{r.overlap_pct_b:.0f}%")


def test_criterion_8_freshness_substitute(report):
    # The published "about two hours earlier" finding and the live-feed
    # threshold derivation cannot be reproduced offline; only the delta
    # machinery is checked, on fixture timestamps.
    left = with_keywords(fetch_feed(TEST_FIXTURES / "feeds" / "left10.xml"))
    right = with_keywords(fetch_feed(TEST_FIXTURES / "feeds" / "right10.xml"))
    pairs = [p for p in compute_overlap(left, right).pairs if p.left.story_id == "L0"]
    summary = freshness_report(pairs)
    ok = len(pairs) == 1 and summary.deltas == [timedelta(hours=2)] and summary.left_first == 1
    report(8, "freshness delta exact on fixture timestamps (+2 h); empirical claims not reproducible", ok,
           f"delta={summary.deltas[0] if summary.deltas else None}")
