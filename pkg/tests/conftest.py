import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def load_golden(name):
    rows = []
    for line in (FIXTURES / "golden" / f"{name}.tsv").read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            continue
        inp, expected = line.split("\t")
        rows.append((inp, expected))
    return rows


def tweet(rid="1", text="hello", created_at="Mon Mar 06 12:00:00 +0000 2017", lang="en",
          coords=None, place_ring=None, entities=None, user="u1"):
    obj = {"id_str": rid, "text": text, "created_at": created_at, "lang": lang,
           "coordinates": None, "place": None,
           "entities": entities or {"hashtags": [], "user_mentions": [], "urls": [], "media": []},
           "user": {"id_str": user}}
    if coords is not None:
        obj["coordinates"] = {"type": "Point", "coordinates": [coords[1], coords[0]]}
    if place_ring is not None:
        obj["place"] = {"full_name": "p", "bounding_box": {"type": "Polygon", "coordinates": [place_ring]}}
    return json.dumps(obj, ensure_ascii=False)


@pytest.fixture
def make_tweet():
    return tweet


def greedy_overlap(learned, planted):
    """Mean top-n overlap after greedily pairing learned and planted term lists."""
    n = len(planted[0])
    pairs = sorted(((len(set(a) & set(b)) / n, i, j) for i, a in enumerate(learned)
                    for j, b in enumerate(planted)), key=lambda t: (-t[0], t[1], t[2]))
    used_l, used_p, scores, mapping = set(), set(), [], {}
    for s, i, j in pairs:
        if i not in used_l and j not in used_p:
            used_l.add(i)
            used_p.add(j)
            scores.append(s)
            mapping[i] = j
    return sum(scores) / len(planted), mapping


def planted_lda(n_docs=500, iterations=200, k=5, seed=7, on_sweep=None, alpha=1.0):
    from citypulse.features import build_vocabulary
    from citypulse.synth import generate_topic_corpus, planted_topics
    from citypulse.topics import LdaConfig, train_lda

    specs = planted_topics(5, 20)
    records, ledger = generate_topic_corpus(specs, n_docs, 20, seed)
    docs = [r["text"].split() for r in records]
    vocab = build_vocabulary(docs)
    model = train_lda(docs, vocab, LdaConfig(k=k, iterations=iterations, alpha=alpha, seed=seed),
                      [r["id_str"] for r in records], on_sweep)
    return specs, docs, ledger, model


PIPELINE = [
    "synth --kind fixture --city rio --seed 3 --out-dir synth",
    "filter synth/tweets.ndjson --city rio --out filtered.ndjson",
    "preprocess filtered.ndjson --preset travel --city rio --out travel.jsonl",
    "preprocess filtered.ndjson --preset topic --city rio --out topic.jsonl",
    "vocab travel.jsonl --out vocab.json",
    "vocab topic.jsonl --out tvocab.json",
    "train-embeddings travel.jsonl --vocab vocab.json --dim 50 --seed 3 --out emb.cpemb",
    "train-classifier travel.jsonl --labels synth/labels.tsv --split train --features both --vocab vocab.json"
    " --embeddings emb.cpemb --seed 3 --out svm.cplin",
    "evaluate travel.jsonl --labels synth/labels.tsv --split test --model svm.cplin --vocab vocab.json"
    " --embeddings emb.cpemb --out-dir eval",
    "evaluate travel.jsonl --labels synth/labels.tsv --cv 10 --features both --vocab vocab.json"
    " --embeddings emb.cpemb --out-dir cv",
    "logo travel.jsonl --labels synth/labels.tsv --features boe --embeddings emb.cpemb --heldout-split"
    " --test-negatives 100 --seed 3 --out-dir logo",
    "predict travel.jsonl --model svm.cplin --vocab vocab.json --embeddings emb.cpemb --out pred.tsv",
    "train-lda topic.jsonl --vocab tvocab.json --k 5 --iterations 50 --seed 3 --out lda.cplda",
    "topics lda.cplda --docs topic.jsonl --out-dir topics",
    "label lda.cplda --map map.json --docs topic.jsonl --city rio --out-dir labels",
    "aggregate filtered.ndjson --city rio --out-dir agg",
    "report filtered.ndjson --city rio --lda lda.cplda --docs topic.jsonl --out-dir report",
]


def run_pipeline_in(root):
    """Run every CLI stage with paths relative to ``root``; returns per-stage exit codes."""
    import os
    import shlex

    from citypulse.cli import main

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    (root / "map.json").write_text('{"labels": {"0": "a", "1": "b"}, "unlabeled": [2]}')
    here = os.getcwd()
    codes = []
    try:
        os.chdir(root)
        for cmd in PIPELINE:
            codes.append(main(shlex.split(cmd)))
    finally:
        os.chdir(here)
    return codes


def tree_bytes(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="session")
def pipeline_runs(tmp_path_factory):
    import time

    runs = []
    for name in ("run_a", "run_b"):
        root = tmp_path_factory.mktemp(name)
        t0 = time.perf_counter()
        codes = run_pipeline_in(root)
        runs.append((root, codes, time.perf_counter() - t0))
    return runs


_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    number = int(name.split("_")[2])
    detail = dict(report.user_properties).get("detail", "")
    if report.when == "call" or report.failed:
        _CRITERIA[number] = (report.passed and report.when == "call", name, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, name, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
