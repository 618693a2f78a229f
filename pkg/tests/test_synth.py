from collections import Counter

import numpy as np
import pytest

from citypulse.geo import CITY_PRESETS, GeoTagKind, PlaceMode, city_filter, classify_geotag
from citypulse.ingest import parse_object
from citypulse.synth import (REFERENCE_MODE_COUNTS, SynthLedger, dump_ndjson, generate_activity,
                             generate_classification_corpus, generate_fixture, generate_geo,
                             generate_topic_corpus, make_record, planted_modes, planted_topics, pseudo_words)
from citypulse.synth import DEFAULT_START

RIO = CITY_PRESETS["rio"].box


def test_pseudo_words():
    w = pseudo_words(500, prefix="x")
    assert len(set(w)) == 500
    assert all(x.isalpha() and not x.endswith("s") and x.startswith("x") for x in w)
    plain = pseudo_words(5)
    assert not set(plain[:2]) & set(pseudo_words(5, exclude=plain[:2]))
    with pytest.raises(ValueError):
        pseudo_words(10 ** 6, syllables=1)


def test_planted_topics_disjoint_and_normalized():
    specs = planted_topics(5, 20)
    vocab = [t for s in specs for t in s.terms]
    assert len(set(vocab)) == 100
    assert all(abs(s.weights.sum() - 1) < 1e-12 for s in specs)
    assert specs[0].top(3) == specs[0].terms[:3]


def test_topic_corpus_deterministic():
    specs = planted_topics(3, 10)
    a = generate_topic_corpus(specs, 50, 8, seed=2)
    b = generate_topic_corpus(specs, 50, 8, seed=2)
    assert dump_ndjson(a[0]) == dump_ndjson(b[0])
    for r in a[0]:
        topic = a[1].records[r["id_str"]]["topic"]
        assert set(r["text"].split()) <= set(specs[topic].terms)


def test_classification_corpus_shape():
    counts = {"bus": 40, "car": 30}
    recs, led = generate_classification_corpus(planted_modes("pt"), counts, 50, seed=1, holdout=True,
                                               n_test_negatives=10, n_background=20)
    assert len(recs) == 40 + 30 + 50 + 10 + 20
    facts = list(led.records.values())
    assert Counter(f["mode"] for f in facts if f["label"] == 1) == counts
    assert sum(1 for f in facts if f["label"] == -1 and f["split"] == "test") == 10
    assert sum(1 for f in facts if f["split"] == "background") == 20
    for r in recs:
        f = led.records[r["id_str"]]
        if f["label"] == 1:
            assert f["term"] in r["text"].split()
            if f["synonym"]:
                assert f["split"] == "test"
    with pytest.raises(ValueError):
        generate_classification_corpus(planted_modes("pt"), {"rocket": 1}, 0, seed=0)


def test_geo_ledger_agrees_with_filter_under_every_mode():
    base = [make_record(f"r{i}", "x", DEFAULT_START, "pt") for i in range(600)]
    recs, led = generate_geo(base, RIO, 0.6, (0.3, 0.2, 0.3, 0.2), seed=5)
    kinds = Counter()
    for raw in recs:
        r = parse_object(raw)
        truth = led.records[r.id]
        kinds[truth["geotag_kind"]] += 1
        assert classify_geotag(r).value == truth["geotag_kind"]
        for mode in PlaceMode:
            assert city_filter(r, RIO, mode).accepted == truth["inside"]
    assert set(kinds) == {k.value for k in GeoTagKind}


def test_geo_pool_repeats_locations():
    base = [make_record(f"r{i}", "x", DEFAULT_START, "pt") for i in range(200)]
    recs, _ = generate_geo(base, RIO, 1.0, (1.0,), seed=1, n_points=10)
    coords = {tuple(r["coordinates"]["coordinates"]) for r in recs}
    assert len(coords) <= 10


def test_activity_generator_records_rates():
    recs, led = generate_activity(14, [5] * 7, seed=0, utc_offset_minutes=60)
    assert sum(led.meta["daily_counts"].values()) == len(recs)
    assert len(led.meta["daily_counts"]) == 14


def test_fixture_and_ledger_round_trip():
    recs, led = generate_fixture(3, RIO, counts={"bus": 10, "car": 10}, n_negatives=20,
                                 n_test_negatives=5, n_background=10)
    assert len(recs) == 55
    back = SynthLedger.from_json(led.to_json())
    assert back.records == led.records and back.meta["utc_offset_minutes"] == -180
    assert sum(REFERENCE_MODE_COUNTS.values()) == 1776
