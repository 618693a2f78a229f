"""Seeded synthetic tweet corpora with ground-truth ledgers.

Every generator draws from ``numpy.random.Generator(PCG64)`` streams spawned
from one ``SeedSequence(seed)``: a 64-bit, splittable PRNG, so each concern
(topics, tokens, timestamps, geometry, ...) has an independent stream and a
given seed always yields byte-identical output.

Text is built from slot templates over pseudo-words; it is not meant to read
like language, only to carry controlled statistical structure.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classify.terms import TRAVEL_TERMS
from .geo import GeoBox, GeoPoint, GeoTagKind
from .ingest import format_created_at

_ONSETS = ("b", "d", "f", "g", "l", "m", "n", "p", "r", "t", "v", "z", "br", "tr", "pl", "gr")
_VOWELS = ("a", "e", "i", "o", "u")
# ledger timestamps and Twitter dates both at one-second resolution
DEFAULT_START = datetime(2017, 3, 6, tzinfo=timezone.utc)  # a Monday


def _streams(seed: int, n: int):
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def pseudo_words(n: int, syllables: int = 3, prefix: str = "", exclude=()) -> List[str]:
    """``n`` distinct deterministic pseudo-words (letters only, never ending in ``s``)."""
    blocked = set(exclude)
    out = []
    for combo in itertools.product(_ONSETS, _VOWELS, repeat=syllables):
        w = prefix + "".join(combo)
        if w not in blocked:
            out.append(w)
            if len(out) == n:
                return out
    raise ValueError("not enough pseudo-words; raise syllables")


@dataclass
class PlantedTopicSpec:
    topic_id: int
    terms: List[str]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if len(w) != len(self.terms) or (w <= 0).any():
            raise ValueError("one positive weight per term required")
        self.weights = w / w.sum()

    def top(self, n: int) -> List[str]:
        order = sorted(range(len(self.terms)), key=lambda i: (-self.weights[i], self.terms[i]))
        return [self.terms[i] for i in order[:n]]


def planted_topics(n_topics: int = 5, terms_per_topic: int = 20, zipf: float = 1.0,
                   disjoint: bool = True) -> List[PlantedTopicSpec]:
    """Topics with Zipf-weighted term lists; ``disjoint`` gives each its own terms."""
    weights = 1.0 / np.arange(1, terms_per_topic + 1) ** zipf
    if disjoint:
        pool = pseudo_words(n_topics * terms_per_topic, prefix="q")
        return [PlantedTopicSpec(k, pool[k * terms_per_topic:(k + 1) * terms_per_topic], weights)
                for k in range(n_topics)]
    pool = pseudo_words(terms_per_topic, prefix="q")
    return [PlantedTopicSpec(k, list(np.roll(pool, k)), weights) for k in range(n_topics)]


@dataclass
class SynthLedger:
    """Per-record ground truth keyed by record id, plus generator metadata."""

    meta: dict = field(default_factory=dict)
    records: Dict[str, dict] = field(default_factory=dict)

    def add(self, rid: str, **facts):
        if rid in self.records:
            self.records[rid].update(facts)
        else:
            self.records[rid] = dict(facts)

    def ids_where(self, key, value) -> List[str]:
        return [rid for rid, f in self.records.items() if f.get(key) == value]

    def to_json(self) -> str:
        return json.dumps({"meta": self.meta, "records": self.records}, ensure_ascii=False,
                          sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SynthLedger":
        d = json.loads(text)
        return cls(d.get("meta", {}), d.get("records", {}))


def make_record(rid: str, text: str, created_at: datetime, lang: str, user_id: str = "u0",
                entities: Optional[dict] = None) -> dict:
    ent = entities or {}
    return {
        "id_str": rid,
        "text": text,
        "created_at": format_created_at(created_at),
        "lang": lang,
        "coordinates": None,
        "place": None,
        "entities": {k: [{}] * int(ent.get(k, 0)) for k in ("hashtags", "user_mentions", "urls", "media")},
        "user": {"id_str": user_id},
    }


def dump_ndjson(records: Sequence[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n" for r in records)


def generate_topic_corpus(specs: Sequence[PlantedTopicSpec], n_docs: int, doc_len: int, seed: int,
                          mixture_alpha: Optional[float] = None, lang: str = "en",
                          start: datetime = DEFAULT_START, days: int = 28,
                          id_prefix: str = "t"):
    """One topic per doc (or a Dirichlet(``mixture_alpha``) mixture), tokens i.i.d. from it.

    Timestamps are uniform over ``days`` from ``start``. The ledger stores the
    doc topic (dominant topic for mixtures) and the UTC timestamp.
    """
    topic_rng, token_rng, time_rng = _streams(seed, 3)
    K = len(specs)
    records, ledger = [], SynthLedger(meta={
        "kind": "topics", "seed": seed, "n_docs": n_docs, "doc_len": doc_len,
        "topics": [{"id": s.topic_id, "terms": s.terms, "weights": s.weights.tolist()} for s in specs],
    })
    for d in range(n_docs):
        if mixture_alpha is None:
            k = int(topic_rng.integers(K))
            per_token = np.full(doc_len, k)
        else:
            theta = topic_rng.dirichlet(np.full(K, mixture_alpha))
            per_token = topic_rng.choice(K, size=doc_len, p=theta)
            k = int(np.argmax(theta))
        words = [specs[t].terms[token_rng.choice(len(specs[t].terms), p=specs[t].weights)]
                 for t in per_token]
        ts = start + timedelta(seconds=int(time_rng.integers(days * 86400)))
        rid = f"{id_prefix}{d:07d}"
        records.append(make_record(rid, " ".join(words), ts, lang, f"u{d % 97}"))
        ledger.add(rid, topic=specs[k].topic_id, created_at=ts.isoformat())
    return records, ledger


# Informal variants per mode, held out of training on request.
SYNONYMS = {
    "pt": {"bike": ["bike"], "bus": ["busão"], "car": ["carango"], "taxi": ["uber"],
           "train": ["trenzinho"], "walk": ["andar"]},
    "en": {"bike": ["cycle"], "bus": ["coach"], "car": ["auto"], "taxi": ["uber"],
           "train": ["tube"], "walk": ["stroll"]},
}
# per-mode positive counts of a realistic English training set
REFERENCE_MODE_COUNTS = {"bike": 300, "bus": 311, "car": 317, "taxi": 314, "train": 317, "walk": 217}


@dataclass
class PlantedModeSpec:
    name: str
    core_terms: List[str]
    synonym_terms: List[str]
    contexts: List[str]


def planted_modes(lang: str = "pt", n_contexts: int = 6) -> List[PlantedModeSpec]:
    """The six transport modes with their terms, synonyms and mode-specific context words."""
    names = sorted(TRAVEL_TERMS[lang])
    pool = pseudo_words(len(names) * n_contexts, prefix="k")
    return [
        PlantedModeSpec(m, list(TRAVEL_TERMS[lang][m]), list(SYNONYMS[lang][m]),
                        pool[i * n_contexts:(i + 1) * n_contexts])
        for i, m in enumerate(names)
    ]


@dataclass
class ClassificationVocab:
    """Word pools for the classification corpus.

    ``travel_context`` words surround the mode terms of every mode, but only
    in the unlabeled background docs; labeled docs never contain them. That
    is the distributional link embeddings can learn and word counts cannot.
    """

    travel_context: List[str]
    fillers: List[str]
    negative_topics: List[List[str]]

    @classmethod
    def default(cls, n_context=12, n_fillers=150, n_neg_topics=8, neg_topic_size=25):
        ctx = pseudo_words(n_context, prefix="c")
        fill = pseudo_words(n_fillers, prefix="f")
        neg = pseudo_words(n_neg_topics * neg_topic_size, prefix="n")
        return cls(ctx, fill, [neg[i * neg_topic_size:(i + 1) * neg_topic_size] for i in range(n_neg_topics)])


def generate_classification_corpus(modes: Sequence[PlantedModeSpec], counts: Dict[str, int],
                                   n_negatives: int, seed: int, holdout: bool = False,
                                   synonym_rate: float = 0.25, n_test_negatives: int = 0,
                                   n_background: int = 0, lang: str = "pt",
                                   vocab: ClassificationVocab = None,
                                   n_fillers: Tuple[int, int] = (3, 6),
                                   start: datetime = DEFAULT_START, days: int = 28,
                                   id_prefix: str = "c"):
    """Travel-related positives per mode, unrelated negatives and unlabeled background.

    A positive reads ``fillers.. TERM mode_ctx ..fillers`` where TERM is a
    core term, or a synonym with probability ``synonym_rate``. A negative
    reads ``fillers.. topic_word topic_word ..fillers``. A background doc is
    either travel talk, ``travel_ctx TERM mode_ctx`` with any term of any mode,
    or topic talk; it gets ``label`` 0 and split ``background``.

    With ``holdout`` every synonym-bearing positive goes to the ``test``
    split, so no labeled training doc contains a synonym. ``n_test_negatives``
    extra negatives are also marked ``test``.
    """
    vocab = vocab or ClassificationVocab.default()
    (order_rng, term_rng, fill_rng, ctx_rng, neg_rng, time_rng, split_rng, bg_rng) = _streams(seed, 8)
    by_name = {m.name: m for m in modes}
    for name in counts:
        if name not in by_name:
            raise ValueError(f"no planted mode named {name!r}")
    plan = [(name, i) for name in sorted(counts) for i in range(counts[name])]
    plan += [(None, i) for i in range(n_negatives + n_test_negatives)]
    plan += [("", i) for i in range(n_background)]
    test_neg = set(split_rng.choice(n_negatives + n_test_negatives, n_test_negatives, replace=False).tolist()) \
        if n_test_negatives else set()
    perm = order_rng.permutation(len(plan))
    ledger = SynthLedger(meta={
        "kind": "classification", "seed": seed, "holdout": holdout, "lang": lang,
        "modes": {m.name: {"core": m.core_terms, "synonyms": m.synonym_terms, "contexts": m.contexts}
                  for m in modes},
        "travel_context": vocab.travel_context,
    })
    names = sorted(by_name)
    records = []
    lo, hi = n_fillers

    def topic_words(rng):
        topic = vocab.negative_topics[int(rng.integers(len(vocab.negative_topics)))]
        return [topic[j] for j in rng.integers(len(topic), size=2)]

    for n, p in enumerate(perm):
        mode, i = plan[p]
        rid = f"{id_prefix}{n:07d}"
        left = [vocab.fillers[j] for j in fill_rng.integers(len(vocab.fillers), size=fill_rng.integers(lo, hi + 1))]
        right = [vocab.fillers[j] for j in fill_rng.integers(len(vocab.fillers), size=fill_rng.integers(lo, hi + 1))]
        if mode == "":
            if bg_rng.random() < 0.5:
                spec = by_name[names[int(bg_rng.integers(len(names)))]]
                pool = spec.core_terms + spec.synonym_terms
                term = pool[int(bg_rng.integers(len(pool)))]
                ctx = vocab.travel_context[int(bg_rng.integers(len(vocab.travel_context)))]
                mode_ctx = spec.contexts[int(bg_rng.integers(len(spec.contexts)))]
                middle = [ctx, term, mode_ctx]
                facts = dict(label=0, mode=spec.name, term=term, synonym=term in spec.synonym_terms,
                             split="background")
            else:
                middle = topic_words(bg_rng)
                facts = dict(label=0, mode=None, term=None, synonym=False, split="background")
        elif mode is not None:
            spec = by_name[mode]
            synonym = bool(spec.synonym_terms) and term_rng.random() < synonym_rate
            pool = spec.synonym_terms if synonym else spec.core_terms
            term = pool[int(term_rng.integers(len(pool)))]
            mode_ctx = spec.contexts[int(ctx_rng.integers(len(spec.contexts)))]
            middle = [term, mode_ctx]
            split = "test" if (holdout and synonym) else "train"
            facts = dict(label=1, mode=mode, term=term, synonym=synonym, split=split)
        else:
            middle = topic_words(neg_rng)
            split = "test" if i in test_neg else "train"
            facts = dict(label=-1, mode=None, term=None, synonym=False, split=split)
        ts = start + timedelta(seconds=int(time_rng.integers(days * 86400)))
        records.append(make_record(rid, " ".join(left + middle + right), ts, lang, f"u{n % 211}"))
        ledger.add(rid, created_at=ts.isoformat(), **facts)
    return records, ledger


def _uniform_in(rng, south, west, north, east):
    return rng.uniform(south, north), rng.uniform(west, east)


def _outside_point(rng, box: GeoBox):
    """A point strictly beyond one side of ``box``; returns ``(lat, lon, side)``."""
    dlat = max(box.ne.lat - box.sw.lat, 0.01)
    dlon = max(box.ne.lon - box.sw.lon, 0.01)
    side = int(rng.integers(4))
    lat, lon = _uniform_in(rng, box.sw.lat - dlat, box.sw.lon - dlon, box.ne.lat + dlat, box.ne.lon + dlon)
    if side == 0:
        lat = box.ne.lat + rng.uniform(0.05, 1.0) * dlat
    elif side == 1:
        lat = box.sw.lat - rng.uniform(0.05, 1.0) * dlat
    elif side == 2:
        lon = box.ne.lon + rng.uniform(0.05, 1.0) * dlon
    else:
        lon = box.sw.lon - rng.uniform(0.05, 1.0) * dlon
    return float(np.clip(lat, -89.0, 89.0)), float(np.clip(lon, -179.0, 179.0)), side


def _inside_point(rng, box: GeoBox):
    # stay off the edges by 1% so 6-decimal rounding cannot push a point out
    mlat = (box.ne.lat - box.sw.lat) * 0.01
    mlon = (box.ne.lon - box.sw.lon) * 0.01
    return _uniform_in(rng, box.sw.lat + mlat, box.sw.lon + mlon, box.ne.lat - mlat, box.ne.lon - mlon)


def _ring(s, w, n, e):
    return [[round(w, 6), round(s, 6)], [round(e, 6), round(s, 6)],
            [round(e, 6), round(n, 6)], [round(w, 6), round(n, 6)]]


GEO_KINDS = (GeoTagKind.PRECISE_COORDINATE, GeoTagKind.DEGENERATE_PLACE_BOX,
             GeoTagKind.VARIABLE_PLACE_BOX, GeoTagKind.UNTAGGED)


def generate_geo(records: Sequence[dict], city: GeoBox, inside_fraction: float,
                 kind_mix: Sequence[float], seed: int, ledger: SynthLedger = None,
                 n_points: int = 0):
    """Attach coordinates or places to ``records`` (copies) and ledger the truth.

    ``kind_mix`` weights (precise, degenerate place, variable place[, untagged]).
    Inside records satisfy the city filter under every place mode (place boxes
    lie fully within the city); outside ones fail it under every mode.
    ``n_points`` > 0 draws precise/degenerate locations from a finite pool of
    that many venues per side, so distinct counts are smaller than tweet counts.
    """
    mix = np.asarray(list(kind_mix) + [0.0] * (4 - len(kind_mix)), dtype=np.float64)
    mix = mix / mix.sum()
    kind_rng, side_rng, pt_rng, box_rng, pool_rng = _streams(seed, 5)
    ledger = ledger if ledger is not None else SynthLedger(meta={"kind": "geo"})
    ledger.meta["geo"] = {"seed": seed, "inside_fraction": inside_fraction, "kind_mix": mix.tolist(),
                          "city": [[city.sw.lat, city.sw.lon], [city.ne.lat, city.ne.lon]]}
    pools = {}
    if n_points:
        for inside in (True, False):
            pools[inside] = [
                (round(a, 6), round(b, 6))
                for a, b in (_inside_point(pool_rng, city) if inside else _outside_point(pool_rng, city)[:2]
                             for _ in range(n_points))
            ]
    out = []
    for rec in records:
        kind = GEO_KINDS[int(kind_rng.choice(4, p=mix))]
        inside = bool(side_rng.random() < inside_fraction) and kind is not GeoTagKind.UNTAGGED
        rec = dict(rec, coordinates=None, place=None)
        if kind in (GeoTagKind.PRECISE_COORDINATE, GeoTagKind.DEGENERATE_PLACE_BOX):
            if n_points:
                lat, lon = pools[inside][int(pt_rng.integers(n_points))]
            else:
                lat, lon = _inside_point(pt_rng, city) if inside else _outside_point(pt_rng, city)[:2]
                lat, lon = round(lat, 6), round(lon, 6)
            if kind is GeoTagKind.PRECISE_COORDINATE:
                rec["coordinates"] = {"type": "Point", "coordinates": [lon, lat]}
            else:
                rec["place"] = {"full_name": f"venue {lat:.3f},{lon:.3f}",
                                "bounding_box": {"type": "Polygon", "coordinates": [_ring(lat, lon, lat, lon)]}}
        elif kind is GeoTagKind.VARIABLE_PLACE_BOX:
            span_lat = (city.ne.lat - city.sw.lat) * 0.02 + 1e-4
            span_lon = (city.ne.lon - city.sw.lon) * 0.02 + 1e-4
            if inside:
                (a_lat, a_lon), (b_lat, b_lon) = _inside_point(box_rng, city), _inside_point(box_rng, city)
                s, n = sorted((a_lat, b_lat))
                w, e = sorted((a_lon, b_lon))
                n, e = max(n, s + 1e-4), max(e, w + 1e-4)
            else:
                # grow away from the city on the violated side so the box stays disjoint
                lat, lon, side = _outside_point(box_rng, city)
                s, n, w, e = lat, lat + span_lat, lon, lon + span_lon
                if side == 1:
                    s, n = lat - span_lat, lat
                elif side == 3:
                    w, e = lon - span_lon, lon
            rec["place"] = {"full_name": "neighbourhood",
                            "bounding_box": {"type": "Polygon", "coordinates": [_ring(s, w, n, e)]}}
        ledger.add(rec["id_str"], geotag_kind=kind.value, inside=inside)
        out.append(rec)
    return out, ledger


def generate_activity(n_days: int, weekday_rates: Sequence[float], seed: int,
                      hour_weights: Sequence[float] = None, utc_offset_minutes: int = 0,
                      n_users: int = 500, user_zipf: float = 1.5,
                      entity_rates: Dict[str, float] = None, lang: str = "en",
                      start: datetime = DEFAULT_START, id_prefix: str = "a"):
    """Tweets whose local-day counts are Poisson(``weekday_rates[weekday]``).

    Hours follow ``hour_weights``; authors are Zipf-distributed over
    ``n_users``; each entity kind appears with its ``entity_rates``
    probability. The ledger keeps the planted per-day rates and, per record,
    the author, local timestamp and entity flags.
    """
    count_rng, hour_rng, user_rng, ent_rng, word_rng = _streams(seed, 5)
    hours = np.asarray(hour_weights if hour_weights is not None else np.ones(24), dtype=np.float64)
    hours = hours / hours.sum()
    rates = {"hashtags": 0.2, "user_mentions": 0.4, "urls": 0.15, "media": 0.1}
    rates.update(entity_rates or {})
    user_p = 1.0 / np.arange(1, n_users + 1) ** user_zipf
    user_p /= user_p.sum()
    words = pseudo_words(60, prefix="w")
    offset = timedelta(minutes=utc_offset_minutes)
    local_start = (start + offset).replace(hour=0, minute=0, second=0, microsecond=0, tzinfo=None)
    ledger = SynthLedger(meta={"kind": "activity", "seed": seed, "n_days": n_days,
                               "weekday_rates": list(weekday_rates), "utc_offset_minutes": utc_offset_minutes,
                               "entity_rates": rates, "daily_counts": {}})
    records = []
    n = 0
    for day in range(n_days):
        local_day = local_start + timedelta(days=day)
        count = int(count_rng.poisson(weekday_rates[local_day.weekday()]))
        ledger.meta["daily_counts"][local_day.date().isoformat()] = count
        for _ in range(count):
            local = local_day + timedelta(hours=int(hour_rng.choice(24, p=hours)),
                                          seconds=int(hour_rng.integers(3600)))
            utc = (local - offset).replace(tzinfo=timezone.utc)
            user = f"u{int(user_rng.choice(n_users, p=user_p))}"
            flags = {k: bool(ent_rng.random() < rates[k]) for k in ("hashtags", "user_mentions", "urls", "media")}
            text = " ".join(words[j] for j in word_rng.integers(len(words), size=6))
            if flags["hashtags"]:
                text += " #" + words[int(word_rng.integers(len(words)))]
            if flags["user_mentions"]:
                text = "@" + words[int(word_rng.integers(len(words)))] + " " + text
            if flags["urls"]:
                text += " https://t.co/" + words[int(word_rng.integers(len(words)))]
            rid = f"{id_prefix}{n:07d}"
            records.append(make_record(rid, text, utc, lang, user, {k: int(v) for k, v in flags.items()}))
            ledger.add(rid, user_id=user, local_time=local.isoformat(), **{f"has_{k}": v for k, v in flags.items()})
            n += 1
    return records, ledger


def generate_fixture(seed: int, city: GeoBox, utc_offset_minutes: int = -180, lang: str = "pt",
                     counts: Dict[str, int] = None, n_negatives: int = 600, n_test_negatives: int = 300,
                     kind_mix=(0.2, 0.01, 0.79), inside_fraction: float = 0.8,
                     n_background: int = 1500):
    """End-to-end fixture: the classification corpus placed around ``city`` with
    Zipf authors and entities, as used by the bundled CLI pipeline."""
    counts = counts or {m: max(20, c // 3) for m, c in REFERENCE_MODE_COUNTS.items()}
    records, ledger = generate_classification_corpus(
        planted_modes(lang), counts, n_negatives, seed, holdout=True,
        n_test_negatives=n_test_negatives, n_background=n_background, lang=lang)
    user_rng, ent_rng = _streams(seed + 1, 2)
    user_p = 1.0 / np.arange(1, 301) ** 1.3
    user_p /= user_p.sum()
    for rec in records:
        rec["user"] = {"id_str": f"u{int(user_rng.choice(300, p=user_p))}"}
        if ent_rng.random() < 0.3:
            rec["text"] = "@amigo " + rec["text"]
            rec["entities"]["user_mentions"] = [{}]
        if ent_rng.random() < 0.2:
            rec["text"] += " #rio"
            rec["entities"]["hashtags"] = [{}]
        ledger.add(rec["id_str"], user_id=rec["user"]["id_str"])
    records, ledger = generate_geo(records, city, inside_fraction, kind_mix, seed + 2, ledger)
    ledger.meta["utc_offset_minutes"] = utc_offset_minutes
    return records, ledger
