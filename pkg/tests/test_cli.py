import json

from conftest import FIXTURES, TEST_FIXTURES
from editnews.cli import main

NOW = "2013-05-20T22:45:00Z"


def test_replay_then_export(tmp_path, capsys):
    db = str(tmp_path / "cli.db")
    args = ["-c", str(FIXTURES / "config.json"), "--store", db]
    assert main(args + ["replay", "--stream", str(FIXTURES / "stream.jsonl"), "--now", NOW]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pages_considered"] == 6 and report["news_created"] > 0
    out = tmp_path / "feed.json"
    assert main(args + ["export", "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == (FIXTURES / "golden_feed.json").read_text(encoding="utf-8")
    capsys.readouterr()
    assert main(args + ["export"]) == 0
    assert capsys.readouterr().out == out.read_text(encoding="utf-8")


def test_run_uses_config_stream(tmp_path, capsys):
    db = str(tmp_path / "cli.db")
    assert main(["-c", str(FIXTURES / "config.json"), "--store", db, "run", "--now", NOW]) == 0
    assert json.loads(capsys.readouterr().out)["finished_at"] == NOW


def test_benchmark(tmp_path, capsys):
    feeds = TEST_FIXTURES / "feeds"
    out = tmp_path / "report.json"
    code = main(["benchmark", "--left", str(feeds / "left10.xml"), "--right", str(feeds / "right10.xml"), "--json", str(out)])
    assert code == 0
    assert "overlap left 40.0% of 10, right 40.0% of 10" in capsys.readouterr().out
    assert len(json.loads(out.read_text())["pairs"]) == 4


def test_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{}\n")
    code = main(["--store", str(tmp_path / "x.db"), "replay", "--stream", str(bad), "--now", NOW])
    assert code == 1
    assert "error:" in capsys.readouterr().err
