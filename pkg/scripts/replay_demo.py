#!/usr/bin/env python3
"""Replay the bundled change streams into a scratch store and show the result.

Runs the fixture stream at its pinned clock, then the three follow-up edits
seven minutes later, printing both run reports and the final feed.

    python scripts/replay_demo.py [--store /tmp/demo.db]
"""

import argparse
import json
import tempfile
from datetime import timedelta
from pathlib import Path

from editnews.clock import parse_instant
from editnews.config import load_config
from editnews.feed import export_feed
from editnews.pipeline import open_store, run_pipeline

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
CLOCK = parse_instant("2013-05-20T22:45:00Z")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--store", help="store path (default: a temporary file)")
    args = parser.parse_args(argv)

    cfg = load_config(FIXTURES / "config.json")
    cfg.storage.path = args.store or str(Path(tempfile.mkdtemp()) / "demo.db")

    for stream, now in (("stream.jsonl", CLOCK), ("stream_update.jsonl", CLOCK + timedelta(minutes=7))):
        cfg.ingest.stream_path = str(FIXTURES / stream)
        report = run_pipeline(cfg, now=now)
        print(f"# {stream}")
        print(json.dumps(report.to_dict(), indent=2))

    with open_store(cfg) as store:
        print("# feed")
        print(export_feed(store), end="")


if __name__ == "__main__":
    main()
