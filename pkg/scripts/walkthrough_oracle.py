#!/usr/bin/env python3
"""Independent walkthrough of the news algorithm over recorded change streams.

Produces the feed export that the engine is expected to emit, without
importing the engine: every count is a brute-force scan over plain lists,
wikitext cleaning and sentence handling are done by character scanning.
Used to produce fixtures/golden_feed.json.

    python scripts/walkthrough_oracle.py fixtures/stream.jsonl@2013-05-20T22:45:00Z \
        --stats fixtures/stats > fixtures/golden_feed.json
"""

import argparse
import json
import sys
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path

STOPWORDS = set(
    """
    a about above after again against all also am an and any are as at be
    because been before being below between both but by can could did do does
    doing down during each few for from further had has have having he her here
    hers herself him himself his how i if in into is it its itself just me more
    most my myself no nor not now of off on once only or other our ours
    ourselves out over own same she should so some such than that the their
    theirs them themselves then there these they this those through to too
    under until up very was we were what when where which while who whom why
    will with would you your yours yourself yourselves
    """.split()
)



def when(text):
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def stamp(dt):
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def category_name(c):
    c = c.strip()
    if c[:9].lower() == "category:":
        c = c[9:]
    return c.strip()


# -- wikitext -------------------------------------------------------------------


def drop_between(text, opener, closer):
    out, depth, i = [], 0, 0
    while i < len(text):
        if text.startswith(opener, i):
            depth += 1
            i += len(opener)
        elif depth and text.startswith(closer, i):
            depth -= 1
            i += len(closer)
        else:
            if not depth:
                out.append(text[i])
            i += 1
    return "".join(out)


def drop_refs(text):
    out = ""
    while True:
        start = text.find("<ref")
        if start < 0:
            return out + text
        out += text[:start]
        tag_end = text.find(">", start)
        if text[tag_end - 1] == "/":
            text = text[tag_end + 1 :]
        else:
            close = text.find("</ref>", tag_end)
            text = text[close + len("</ref>") :]


def unlink(text):
    out = ""
    while True:
        start = text.find("[[")
        if start < 0:
            return out + text
        end = text.find("]]", start)
        inner = text[start + 2 : end]
        out += text[:start]
        if inner.split(":")[0].lower() not in ("category", "file", "image"):
            out += inner.split("|")[-1]
        text = text[end + 2 :]


def clean(text):
    text = drop_refs(text)
    text = drop_between(text, "{{", "}}")
    text = unlink(text)
    while "''" in text:
        text = text.replace("''", "")
    lines = [" ".join(line.split()) for line in text.split("\n")]
    return "\n".join(line for line in lines if line)


def words(text):
    toks, cur = [], ""
    text = text.lower()
    for i, ch in enumerate(text):
        if ch.isalnum():
            cur += ch
        elif ch == "'" and cur and i + 1 < len(text) and text[i + 1].isalnum() and cur[-1] != "'":
            cur += ch
        else:
            if cur:
                toks.append(cur)
            cur = ""
    if cur:
        toks.append(cur)
    return toks


def sentences(text):
    out, cur, i = [], "", 0
    while i < len(text):
        ch = text[i]
        if text.startswith("\n\n", i):
            out.append(cur)
            cur = ""
            while i < len(text) and text[i] in " \n\t":
                i += 1
            continue
        cur += ch
        i += 1
        if ch in ".!?" and i < len(text) and text[i] in " \n\t":
            out.append(cur)
            cur = ""
            while i < len(text) and text[i] in " \n\t":
                i += 1
    out.append(cur)
    return [s.strip() for s in out if s.strip()]


def summarize(text, limit):
    sents = sentences(text)
    if len(sents) <= limit:
        return text
    freq = {}
    for s in sents:
        for w in words(s):
            if w not in STOPWORDS:
                freq[w] = freq.get(w, 0) + 1
    scored = []
    for idx, s in enumerate(sents):
        ws = words(s)
        score = Fraction(sum(freq[w] for w in ws if w not in STOPWORDS), len(ws)) if ws else Fraction(0)
        scored.append((score, idx))
    keep = []
    for _ in range(limit):
        best = None
        for score, idx in scored:
            if idx in keep:
                continue
            if best is None or score > best[0]:
                best = (score, idx)
        keep.append(best[1])
    return " ".join(sents[i] for i in sorted(keep))


# -- the walkthrough ------------------------------------------------------------


def load_stream(path):
    edits, seen = [], set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        o = json.loads(line)
        if o["rev_id"] in seen:
            continue
        seen.add(o["rev_id"])
        edits.append(o)
    return edits


def views(stats_dir, title, now):
    path = Path(stats_dir) / (title.replace(" ", "_").replace("/", "%2F") + ".json")
    if not path.exists():
        return 0, 0
    daily = json.loads(path.read_text(encoding="utf-8"))["daily_views"]
    yesterday = now.date() - timedelta(days=1)
    window = [(yesterday - timedelta(days=k)).isoformat() for k in range(30)]
    return daily.get(window[0], 0), sum(daily.get(d, 0) for d in window)


class World:
    def __init__(self):
        self.edits = []  # every stored edit
        self.page_cats = {}
        self.page_title = {}
        self.news = []  # dicts in the export shape

    def news_generating(self):
        out = set()
        for e in self.edits:
            for n in self.news:
                if n["page_id"] == e["page_id"] and when(e["ts"]) < when(n["generated_at"]):
                    out.add(e["user"])
        return out

    def authors_of(self, page):
        return {e["user"] for e in self.edits if e["page_id"] == page}

    def run(self, stream, now, stats_dir, limit=7, threshold=Fraction(1), min_chars=50, top_k=50, expert_k=5):
        batch = [e for e in load_stream(stream) if e["ns"] == 0 and not e["bot"]]
        known = {e["rev_id"] for e in self.edits}
        pages = {}
        for e in batch:
            pages.setdefault(e["page_id"], []).append(e)
            cats = self.page_cats.setdefault(e["page_id"], set())
            cats.update(category_name(c) for c in e["categories"])
        for pid, es in pages.items():
            es.sort(key=lambda e: (e["ts"], e["rev_id"]))
            self.page_title[pid] = es[-1]["page_title"]
        ws_cats = {pid: sorted({category_name(c) for e in es for c in e["categories"]}) for pid, es in pages.items()}
        self.edits += [e for e in batch if e["rev_id"] not in known]

        authors = {e["user"] for e in self.edits}
        news_gen = self.news_generating()
        mean = Fraction(sum(len(es) for es in pages.values()), len(pages)) if pages else None

        selected = []
        for pid in sorted(pages):
            mine = self.authors_of(pid)
            experts = set()
            for a in mine:
                for e in self.edits:
                    if e["user"] == a and e["page_id"] != pid and self.page_cats[e["page_id"]] & self.page_cats[pid]:
                        experts.add(a)
            yv, tv = views(stats_dir, self.page_title[pid], now)
            r = {
                "authors_with_news": Fraction(len(mine & news_gen), len(news_gen)) if news_gen else Fraction(0),
                "common_authors": Fraction(len(mine), len(authors)),
                "domain_experts": Fraction(len(experts), len(authors)),
                "recent_changes": len(pages[pid]) / mean,
                "relevance": Fraction(yv, tv) if tv else Fraction(0),
            }
            total = sum(r.values())
            if total > threshold:
                selected.append((total, pid, r))
        selected.sort(key=lambda t: (-t[0], t[1]))

        counts = {}
        for e in self.edits:
            counts[e["user"]] = counts.get(e["user"], 0) + 1
        top = set(sorted(counts, key=lambda a: (-counts[a], a))[:top_k])

        made = []
        for total, pid, r in selected:
            cat_experts = set()
            for c in ws_cats[pid]:
                per = {}
                for e in self.edits:
                    if c in self.page_cats[e["page_id"]]:
                        per[e["user"]] = per.get(e["user"], 0) + 1
                cat_experts |= set(sorted(per, key=lambda a: (-per[a], a))[:expert_k])
            used = [
                e for e in pages[pid]
                if e["user"] in top or e["user"] in cat_experts or len(e["added_text"]) > min_chars
            ]
            blocks = [b for b in (clean(e["added_text"]) for e in used) if b]
            if not blocks:
                continue
            summary = summarize("\n\n".join(blocks), limit)
            made.append({
                "id": f"{pid}-{now:%Y%m%dT%H%M%SZ}",
                "page_id": pid,
                "title": self.page_title[pid],
                "summary": summary,
                "categories": ws_cats[pid],
                "generated_at": stamp(now),
                "updated_at": stamp(now),
                "final_rank": float(total),
                "rank_breakdown": {k: {"value": float(r[k]), "weight": 1.0} for k in sorted(r)},
                "source_revision_ids": [e["rev_id"] for e in used],
            })

        created = updated = 0
        for item in made:
            prior = [
                n for n in self.news
                if n["page_id"] == item["page_id"]
                and abs(when(n["generated_at"]) - when(item["generated_at"])) <= timedelta(hours=48)
            ]
            if prior:
                prior.sort(key=lambda n: n["id"])
                old = max(prior, key=lambda n: n["generated_at"])
                for key in ("summary", "source_revision_ids", "final_rank", "rank_breakdown"):
                    old[key] = item[key]
                old["updated_at"] = max(old["updated_at"], item["updated_at"])
                updated += 1
            else:
                self.news.append(item)
                created += 1
        return {"pages": len(pages), "selected": len(selected), "created": created, "updated": updated}

    def feed(self):
        ordered = sorted(self.news, key=lambda n: n["id"])
        ordered.sort(key=lambda n: n["updated_at"], reverse=True)
        return json.dumps(ordered, indent=2, ensure_ascii=False) + "\n"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("runs", nargs="+", help="STREAM@ISO-TIME, applied in order")
    parser.add_argument("--stats", required=True, help="directory of per-page view fixtures")
    parser.add_argument("--report", action="store_true", help="print per-run counts to stderr")
    args = parser.parse_args(argv)
    world = World()
    for spec in args.runs:
        stream, at = spec.rsplit("@", 1)
        counts = world.run(stream, when(at), args.stats)
        if args.report:
            print(spec, counts, file=sys.stderr)
    sys.stdout.write(world.feed())


if __name__ == "__main__":
    main()
