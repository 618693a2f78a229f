import csv
import json

import pytest

from conftest import PIPELINE, tree_bytes
from citypulse.cli import main


def err_line(capsys):
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 1
    return lines[0]


def test_pipeline_succeeds_and_reruns_identically(pipeline_runs):
    (a, codes_a, _), (b, codes_b, _) = pipeline_runs
    assert codes_a == [0] * len(PIPELINE) and codes_b == codes_a
    assert tree_bytes(a) == tree_bytes(b)


def test_pipeline_outputs(pipeline_runs):
    root = pipeline_runs[0][0]
    report = json.loads((root / "eval" / "report.json").read_text())
    assert report["f1"] > 0.8
    with open(root / "cv" / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["features"] == "both" and float(rows[0]["f1"]) > 0.8
    logo = json.loads((root / "logo" / "logo.json").read_text())
    assert set(logo["modes"]) == {"bike", "bus", "car", "taxi", "train", "walk"}
    pred = (root / "pred.tsv").read_text().splitlines()
    assert pred[0] == "id\tscore\tlabel" and len(pred) > 100
    for name in ("daily.csv", "weekday_summary.csv", "hour_summary.csv", "user_activity.csv", "metadata.csv"):
        assert (root / "agg" / name).exists()
    svgs = sorted(p.name for p in (root / "report").glob("*.svg"))
    assert svgs == ["daily.svg", "hour.svg", "topic_weekday.svg", "user_activity.svg", "weekday.svg"]
    assert (root / "filtered.ndjson.manifest.json").exists()
    stats = json.loads((root / "filtered.ndjson.stats.json").read_text())
    assert 0 < stats["accepted"] < stats["ingest"]["lines_read"]


def test_unknown_city(tmp_path, capsys):
    src = tmp_path / "in.ndjson"
    src.write_text("")
    assert main(["filter", str(src), "--city", "atlantis", "--out", str(tmp_path / "o")]) == 1
    assert err_line(capsys).startswith("ERROR ConfigError: ")


def test_missing_input(tmp_path, capsys):
    assert main(["filter", str(tmp_path / "none.ndjson"), "--city", "rio", "--out", str(tmp_path / "o")]) == 1
    assert err_line(capsys).startswith("ERROR IngestIOError: ")


def test_unknown_preset(tmp_path, capsys):
    src = tmp_path / "in.ndjson"
    src.write_text("")
    assert main(["preprocess", str(src), "--preset", "poetry", "--lang", "en", "--out", str(tmp_path / "o")]) == 1
    assert err_line(capsys).split(":")[0] in ("ERROR ConfigError", "ERROR UnknownStep")


def test_empty_corpus_vocab(tmp_path, capsys):
    docs = tmp_path / "docs.jsonl"
    docs.write_text("")
    assert main(["vocab", str(docs), "--out", str(tmp_path / "v.json")]) == 1
    assert err_line(capsys).startswith("ERROR EmptyCorpus: ")


def test_filter_tolerates_malformed_lines(tmp_path, make_tweet):
    src = tmp_path / "in.ndjson"
    good = make_tweet(rid="1", text="oi", lang="pt", coords=(-22.9, -43.2))
    src.write_text(good + "\n{broken\n\n" + make_tweet(rid="2", lang="pt") + "\n")
    out = tmp_path / "out.ndjson"
    assert main(["filter", str(src), "--city", "rio", "--out", str(out)]) == 0
    assert [json.loads(l)["id_str"] for l in out.read_text().splitlines()] == ["1"]
    stats = json.loads((tmp_path / "out.ndjson.stats.json").read_text())
    assert stats["ingest"]["malformed"] == 1 and stats["ingest"]["lines_read"] == 3


def test_stale_artifacts_refused(pipeline_runs, tmp_path, capsys):
    root = pipeline_runs[0][0]
    other = tmp_path / "small.json"
    assert main(["vocab", str(root / "travel.jsonl"), "--max-size", "50", "--out", str(other)]) == 0
    capsys.readouterr()
    rc = main(["predict", str(root / "travel.jsonl"), "--model", str(root / "svm.cplin"),
               "--vocab", str(other), "--embeddings", str(root / "emb.cpemb"),
               "--out", str(tmp_path / "p.tsv")])
    assert rc == 1
    assert err_line(capsys).startswith("ERROR ArtifactError: ")


def test_store_default_naming(tmp_path, monkeypatch):
    monkeypatch.setenv("CITYPULSE_HOME", str(tmp_path / "home"))
    assert main(["synth", "--kind", "topics", "--n-docs", "20", "--seed", "1"]) == 0
    made = list((tmp_path / "home").rglob("manifest.json"))
    assert made, "directory outputs land in the store with a manifest"


def test_cv_flag_validation(pipeline_runs, tmp_path, capsys):
    root = pipeline_runs[0][0]
    rc = main(["evaluate", str(root / "travel.jsonl"), "--labels", str(root / "synth" / "labels.tsv"),
               "--out-dir", str(tmp_path / "e")])
    assert rc == 1
    assert err_line(capsys).startswith("ERROR ConfigError: ")
