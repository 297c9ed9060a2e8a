import json

import pytest

from ctiprivacy.cli import parse_duration, run
from ctiprivacy.samples import sample_bytes

SUBCOMMANDS = ["registry", "score", "annotate", "sanitize", "partition", "anonymize",
               "dp-count", "quality", "corpus", "samples"]


@pytest.fixture
def worm(tmp_path):
    p = tmp_path / "worm.xml"
    p.write_bytes(sample_bytes("iodef"))
    return p


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help(cmd, capsys):
    assert run([cmd, "--help"]) == 0
    assert "usage" in capsys.readouterr().out


def test_usage_errors(capsys):
    assert run([]) == 3
    assert run(["frobnicate"]) == 3
    assert run(["score", "x.xml", "--mode", "median"]) == 3


def test_registry(capsys):
    assert run(["registry", "list"]) == 0
    assert "iodef" in capsys.readouterr().out
    assert run(["registry", "show", "iodef"]) == 0
    assert "Contact" in capsys.readouterr().out
    assert run(["registry", "validate"]) == 0
    assert run(["registry", "show", "nonesuch"]) == 2


def test_score_and_threshold(worm, capsys):
    assert run(["score", str(worm)]) == 0
    assert capsys.readouterr().out == "score: 51\n"
    assert run(["score", str(worm), "--fail-over", "50"]) == 1
    capsys.readouterr()
    assert run(["score", str(worm), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["score"] == 51
    assert run(["score", str(worm) + ".missing"]) == 2


def test_annotate_no_color(worm, capsys, monkeypatch):
    monkeypatch.setenv("NO_COLOR", "1")
    assert run(["annotate", str(worm)]) == 0
    out = capsys.readouterr().out
    assert "\x1b[" not in out and out.endswith("score: 51\n")


def test_sanitize(worm, tmp_path, capsys):
    pol = tmp_path / "pol.json"
    pol.write_text(json.dumps({"defaults": {"pii": "suppress", "sensitive": "suppress",
                                            "inference": "suppress"}}))
    out = tmp_path / "clean.xml"
    assert run(["sanitize", str(worm), "--policy", str(pol), "-o", str(out)]) == 0
    assert run(["score", str(out)]) == 0
    assert capsys.readouterr().out.strip().endswith("score: 0")


def test_partition_and_merge(worm, tmp_path):
    d = tmp_path / "parts"
    assert run(["partition", str(worm), "-o", str(d), "--tier", "vetted"]) == 0
    assert (d / "view-vetted.xml").exists()
    merged = tmp_path / "merged.xml"
    assert run(["partition", "merge", str(d), "-o", str(merged)]) == 0
    (d / "pii.xml").unlink()
    assert run(["partition", "merge", str(d), "-o", str(merged)]) == 2


@pytest.fixture
def ages(tmp_path):
    t = tmp_path / "t.csv"
    t.write_text("age,disease\n21,flu\n22,flu\n23,cold\n24,flu\n")
    types = tmp_path / "types.json"
    types.write_text('{"age": "number"}')
    return t, types


def test_anonymize(ages, tmp_path, capsys):
    t, types = ages
    base = ["--table", str(t), "--types", str(types), "--qi", "age", "--k", "2"]
    assert run(["anonymize", "check", *base]) == 0
    assert run(["anonymize", "check", *base, "--require"]) == 1
    out = tmp_path / "anon.csv"
    assert run(["anonymize", "enforce", *base, "-o", str(out)]) == 0
    assert out.read_text().splitlines()[1] == "20..30,flu"
    capsys.readouterr()
    assert run(["anonymize", "check", *base[:2], "--qi", "age", "--k", "2", "--table", str(out),
                "--require"]) == 0


def test_dp_count_deterministic(ages, capsys):
    t, types = ages
    args = ["dp-count", "--table", str(t), "--types", str(types), "--where", "age >= 22",
            "--epsilon", "0.5", "--seed", "11"]
    assert run(args) == 0
    first = capsys.readouterr().out
    assert run(args) == 0
    assert capsys.readouterr().out == first
    assert run(args[:-4] + ["--epsilon", "0", "--seed", "1"]) == 3


def test_quality(tmp_path, capsys):
    feed = tmp_path / "feed.jsonl"
    feed.write_text(
        '{"value": "a.example", "class": "domain", "provider": "p", "first_shared": "2024-01-01T00:00:00Z"}\n'
        '{"value": "b.example", "class": "domain", "provider": "q", "first_shared": "2024-03-01T00:00:00Z"}\n')
    assert run(["quality", "score", "--feed", str(feed)]) == 0
    assert "a.example" in capsys.readouterr().out
    assert run(["quality", "free-riders", "--feed", str(feed)]) == 0
    assert "p" in capsys.readouterr().out
    assert run(["quality", "score", "--feed", str(feed), "--weights", "1,1,1"]) == 3
    assert run(["quality", "score", "--feed", str(tmp_path / "none.jsonl")]) == 2


def test_corpus_and_samples(tmp_path, capsys):
    assert run(["samples", "-o", str(tmp_path / "s"), "--full-coverage", "iodef"]) == 0
    capsys.readouterr()
    assert (tmp_path / "s" / "iodef_full_coverage.xml").exists()
    assert run(["corpus", str(tmp_path / "s"), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["reports"]) == 3


def test_parse_duration():
    from datetime import timedelta
    assert parse_duration("7d") == timedelta(days=7)
    assert parse_duration("90m") == timedelta(minutes=90)
    with pytest.raises(Exception):
        parse_duration("soon")
