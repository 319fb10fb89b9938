"""Command line entry point: run, schedule, replay, serve, benchmark, export."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import threading
from dataclasses import replace

from . import benchmark as bm
from .clock import parse_instant
from .config import Config, load_config
from .errors import EditNewsError
from .feed import export_feed
from .pipeline import Scheduler, open_store, run_pipeline

logger = logging.getLogger("editnews")


def _config(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    if getattr(args, "store", None):
        cfg.storage.path = args.store
    return cfg


def _now(args):
    return parse_instant(args.now) if getattr(args, "now", None) else None


def _print_report(report):
    print(json.dumps(report.to_dict(), indent=2))


def cmd_run(args):
    _print_report(run_pipeline(_config(args), now=_now(args)))


def cmd_replay(args):
    cfg = _config(args)
    cfg.ingest = replace(cfg.ingest, stream_path=args.stream, endpoint=None)
    _print_report(run_pipeline(cfg, now=_now(args)))


def cmd_schedule(args):
    cfg = _config(args)
    interval = args.interval * 60 if args.interval else cfg.schedule.interval_minutes * 60
    scheduler = Scheduler(lambda: _print_report(run_pipeline(cfg)), interval)
    stop = threading.Event()
    try:
        scheduler.run(stop)
    except KeyboardInterrupt:
        stop.set()


def cmd_serve(args):
    from .server import serve

    cfg = _config(args)
    serve(
        cfg.storage.path,
        host=args.host or cfg.server.host,
        port=args.port or cfg.server.port,
    )


def cmd_export(args):
    cfg = _config(args)
    with open_store(cfg) as store:
        text = export_feed(store, args.out)
    if not args.out:
        sys.stdout.write(text)


def cmd_benchmark(args):
    cfg = _config(args).benchmark
    left = bm.with_keywords(bm.fetch_feed(args.left), cfg.keyword_n)
    right = bm.with_keywords(bm.fetch_feed(args.right), cfg.keyword_n)
    report = bm.compute_overlap(
        left, right, args.min_class, cfg.thresholds, mode=cfg.strength_mode
    )
    freshness = bm.freshness_report(report.pairs)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(bm.report_to_dict(report, freshness), fh, indent=2)
            fh.write("\n")
    print(bm.format_table(report, freshness))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="editnews", description=__doc__)
    parser.add_argument("-c", "--config", help="JSON config file")
    parser.add_argument("--store", help="override storage.path")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one pipeline pass")
    p.add_argument("--now", help="pin the run clock (ISO-8601 UTC)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="one pipeline pass over a recorded change stream")
    p.add_argument("--stream", required=True)
    p.add_argument("--now", help="pin the run clock (ISO-8601 UTC)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("schedule", help="run the pipeline periodically")
    p.add_argument("--interval", type=float, help="minutes between runs")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("serve", help="serve the news feed over HTTP")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="write the feed JSON")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("benchmark", help="compare two feeds for overlap and freshness")
    p.add_argument("--left", required=True, help="RSS/Atom/feed-JSON file or URL")
    p.add_argument("--right", required=True, help="RSS/Atom/feed-JSON file or URL")
    p.add_argument("--min-class", choices=["weak", "strong"], default="strong")
    p.add_argument("--json", help="also write the report as JSON to this file")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except EditNewsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
