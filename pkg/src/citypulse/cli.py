"""``citypulse`` command line.

Every subcommand writes its outputs either to ``--out``/``--out-dir`` or,
when those are omitted, into the artifact store (``$CITYPULSE_HOME``,
default ``./.citypulse``) under a name carrying a hash of the inputs. Each
output gets a ``.manifest.json`` sidecar. Failures exit with status 1 and
one stderr line ``ERROR <ErrorClass>: <message>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Callable, Dict, Optional

import numpy as np

from . import aggregate as agg
from . import charts
from .classify import (EvalReport, k_fold_cv, leave_one_group_out, load_forest, load_linear,
                       save_forest, save_linear)
from .classify.forest import MAGIC as FOREST_MAGIC
from .classify.linear import MAGIC as LINEAR_MAGIC
from .config import RunConfig, pick
from .errors import ArtifactError, CityPulseError, ConfigError, EmptyCorpus, MalformedJson, ParseError
from .features import Standardizer, Vocabulary, build_vocabulary
from .features.embeddings import SkipgramConfig, load_embedding, save_embedding, train_pvdbow, train_skipgram
from .geo import GeotagBreakdown, city_filter
from .ingest import dumps, format_created_at, parse_created_at, parse_record, read_path
from .store import ArtifactStore, check_digest, check_magic, digests, file_digest, input_hash, write_lock
from .synth import (REFERENCE_MODE_COUNTS, dump_ndjson, generate_activity, generate_classification_corpus,
                    generate_fixture, generate_topic_corpus, planted_modes, planted_topics)
from .textprep import PipelineConfig, localize_timestamp, read_word_list, run_pipeline
from .topics import (LdaConfig, TopicLabelMap, apply_label_map, dominant_topic, infer_topics, load_lda,
                     save_lda, top_words, topic_day_of_week, train_lda)
from .workflow import (CLASSIFIERS, FEATURE_KINDS, Doc, build_features, labeled_docs, labels_tsv,
                       doc_seed, make_trainer, parse_doc_line, read_docs, read_labels, write_docs)

CSV_SUMMARY_HEADER = "model,features,precision,recall,f1,auc\n"


class Ctx:
    """Parsed args plus config, store and output helpers."""

    def __init__(self, args):
        self.args = args
        self.cfg = RunConfig.load(args.config)
        if args.seed is not None:
            self.cfg = self.cfg.override(seed=args.seed)
        self.store = ArtifactStore(args.store or self.cfg.get("store.root"))

    @property
    def seed(self) -> int:
        return self.cfg.seed

    def city(self):
        name = self.args.city or self.cfg.get("city")
        if not name:
            raise ConfigError("a city is required (--city or 'city = <name>' in the config)")
        return self.cfg.city(name)

    def _target(self, explicit, kind, stem, inputs, params, ext) -> Path:
        if explicit:
            return Path(explicit)
        return self.store.path_for(kind, stem, inputs, params, ext)

    def emit(self, kind: str, stem: str, ext: str, inputs: Dict[str, Optional[str]], params: dict,
             write: Callable[[Path], None], explicit: Optional[str] = None) -> Path:
        """Write one artifact atomically under a lock, then its manifest."""
        dig = digests(inputs)
        path = self._target(explicit if explicit is not None else self.args.out, kind, stem, dig, params, ext)
        path.parent.mkdir(parents=True, exist_ok=True)
        with write_lock(path):
            tmp = path.with_name(path.name + ".tmp")
            write(tmp)
            os.replace(tmp, path)
            ArtifactStore.record(path, kind, dig, params, self.cfg.effective(), [path])
        print(path)
        return path

    def emit_dir(self, kind: str, stem: str, inputs: Dict[str, Optional[str]], params: dict,
                 files: Dict[str, str]) -> Path:
        dig = digests(inputs)
        out = self.args.out_dir
        root = Path(out) if out else self.store.root / kind / f"{stem}-{input_hash(dig, params)}"
        root.mkdir(parents=True, exist_ok=True)
        marker = root / "manifest.json"
        with write_lock(marker):
            written = []
            for name, text in files.items():
                p = root / name
                tmp = p.with_name(p.name + ".tmp")
                tmp.write_text(text, encoding="utf-8")
                os.replace(tmp, p)
                written.append(p)
            entry = {"kind": kind, "inputs": dig, "params": params, "config": self.cfg.effective(),
                     "outputs": {p.name: file_digest(p) for p in written}}
            marker.write_text(json.dumps(entry, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
                              encoding="utf-8")
        print(root)
        return root


def _text_writer(text: str):
    def write(path: Path):
        path.write_text(text, encoding="utf-8")
    return write


# ---- filter / preprocess -------------------------------------------------

def cmd_filter(ctx: Ctx):
    city = ctx.city()
    langs = None if ctx.args.any_lang else (city.languages or None)
    records, stats = read_path(ctx.args.input, langs)
    kept = []
    reasons: Dict[str, int] = {}
    breakdown = GeotagBreakdown()
    for rec in records:
        breakdown.add(rec)
        decision = city_filter(rec, city.box, city.place_mode)
        reasons[decision.reason.value] = reasons.get(decision.reason.value, 0) + 1
        if decision.accepted:
            kept.append(dumps(rec) + "\n")
    summary = {"city": city.name, "place_mode": city.place_mode.value, "accepted": len(kept),
               "ingest": stats.as_dict(), "reasons": dict(sorted(reasons.items())),
               "geotags": {k.value: asdict(v) for k, v in breakdown.table().items()}}
    params = {"city": city.name, "place_mode": city.place_mode.value, "languages": list(langs or ())}
    path = ctx.emit("filtered", "tweets", "ndjson", {"input": ctx.args.input}, params,
                    _text_writer("".join(kept)))
    stats_path = Path(str(path) + ".stats.json")
    stats_path.write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    print(json.dumps({"accepted": len(kept), "lines_read": stats.lines_read, "malformed": stats.malformed}),
          file=sys.stderr)


def _pipeline_config(ctx: Ctx) -> PipelineConfig:
    a = ctx.args
    preset = pick(ctx.cfg, "preprocess.preset", a.preset, "topic", str)
    lang = a.lang or ctx.cfg.get("preprocess.lang")
    if lang is None and (a.city or ctx.cfg.get("city")):
        langs = ctx.city().languages
        lang = langs[0] if langs else None
    lang = lang or "en"
    stop_path = a.stopwords or ctx.cfg.get("preprocess.stopwords")
    stopwords = read_word_list(stop_path) if stop_path else None
    min_length = pick(ctx.cfg, "preprocess.min_length", a.min_length, 2, int)
    return PipelineConfig.preset(preset, lang, stopwords=stopwords, min_length=min_length)


def _iter_inputs(path):
    """Tweets from NDJSON, or token docs (a preprocess output) joined back to text."""
    with open(path, "rb") as fh:
        for n, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                doc = parse_doc_line(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError) as exc:
                raise MalformedJson(f"{path}:{n}: {exc}") from exc
            if doc is not None:
                yield doc.id, " ".join(doc.tokens), doc.created_at, doc.user_id, doc.lang
                continue
            try:
                rec = parse_record(raw)
            except ParseError as exc:
                print(f"skipping line {n}: {type(exc).__name__}", file=sys.stderr)
                continue
            yield rec.id, rec.text, format_created_at(rec.created_at_utc), rec.user_id, rec.lang


def cmd_preprocess(ctx: Ctx):
    pc = _pipeline_config(ctx)
    docs = [Doc(rid, run_pipeline(text, pc).tokens, created, user, lang)
            for rid, text, created, user, lang in _iter_inputs(ctx.args.input)]
    params = {"steps": list(pc.steps), "lang": pc.lang, "min_length": pc.min_length,
              "stopwords": len(pc.stopwords)}
    ctx.emit("docs", "docs", "jsonl", {"input": ctx.args.input}, params, _text_writer(write_docs(docs)))


# ---- features ------------------------------------------------------------

def cmd_vocab(ctx: Ctx):
    a = ctx.args
    docs = read_docs(a.docs)
    min_count = pick(ctx.cfg, "vocab.min_count", a.min_count, 1, int)
    max_df = pick(ctx.cfg, "vocab.max_df_ratio", a.max_df, 1.0, float)
    max_size = pick(ctx.cfg, "vocab.max_size", a.max_size, 0, int)
    vocab = build_vocabulary([d.tokens for d in docs], min_count, max_df, max_size)
    for w in vocab.warnings:
        print(f"warning: {w}", file=sys.stderr)
    params = {"min_count": min_count, "max_df_ratio": max_df, "max_size": max_size}
    ctx.emit("vocab", "vocab", "json", {"docs": a.docs}, params, _text_writer(vocab.dumps() + "\n"))


def load_vocab(path) -> Vocabulary:
    try:
        with open(path, encoding="utf-8") as fh:
            return Vocabulary.from_dict(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ArtifactError(f"unreadable vocabulary {path}: {exc}") from exc


def cmd_train_embeddings(ctx: Ctx):
    a = ctx.args
    docs = read_docs(a.docs)
    vocab = load_vocab(a.vocab)
    s = ctx.cfg.section("embeddings")
    cfg = SkipgramConfig(
        dim=pick(ctx.cfg, "embeddings.dim", a.dim, 100, int),
        window=pick(ctx.cfg, "embeddings.window", a.window, 2, int),
        epochs=pick(ctx.cfg, "embeddings.epochs", a.epochs, 10, int),
        negatives=int(s.get("negatives", 5)), lr=float(s.get("lr", 0.025)),
        min_lr=float(s.get("min_lr", 0.0001)), seed=ctx.seed,
        subsample=float(s.get("subsample", 0.0)), infer_epochs=int(s.get("infer_epochs", 50)))
    mode = pick(ctx.cfg, "embeddings.model", a.model, "pvdbow", str)
    if mode == "pvdbow":
        _, model = train_pvdbow([d.tokens for d in docs], vocab, cfg, [d.id for d in docs])
    elif mode == "skipgram":
        model = train_skipgram([d.tokens for d in docs], vocab, cfg)
    else:
        raise ConfigError("embeddings model must be pvdbow or skipgram")
    params = dict(cfg.to_dict(), model=mode)
    ctx.emit("embeddings", mode, "cpemb", {"docs": a.docs, "vocab": a.vocab}, params,
             lambda p: save_embedding(model, p))


# ---- topics --------------------------------------------------------------

def cmd_train_lda(ctx: Ctx):
    a = ctx.args
    docs = read_docs(a.docs)
    vocab = load_vocab(a.vocab)
    cfg = LdaConfig(k=pick(ctx.cfg, "lda.k", a.k, 50, int),
                    iterations=pick(ctx.cfg, "lda.iterations", a.iterations, 20, int),
                    alpha=pick(ctx.cfg, "lda.alpha", a.alpha, None, float),
                    beta=pick(ctx.cfg, "lda.beta", a.beta, 0.01, float), seed=ctx.seed)
    model = train_lda([d.tokens for d in docs], vocab, cfg, [d.id for d in docs])
    ctx.emit("lda", f"lda-k{cfg.k}", "cplda", {"docs": a.docs, "vocab": a.vocab}, asdict(cfg),
             lambda p: save_lda(model, p))


def _doc_topics(model, docs, seed):
    """Dominant topic per doc: trained assignments where available, inference otherwise."""
    theta = model.theta()
    index = {d: i for i, d in enumerate(model.doc_ids)}
    out = []
    for doc in docs:
        i = index.get(doc.id)
        if i is not None:
            out.append(dominant_topic(theta[i]))
        else:
            out.append(dominant_topic(infer_topics(model, doc.tokens, seed=doc_seed(seed, doc.id))))
    return out


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_topics(ctx: Ctx):
    a = ctx.args
    model = load_lda(a.model)
    n = pick(ctx.cfg, "topics.top", a.top, 10, int)
    rows = []
    for k in range(model.k):
        for rank, (term, prob) in enumerate(top_words(model, k, n).terms, 1):
            rows.append([k, rank, term, f"{prob:.6f}"])
    files = {"topics.csv": _csv_text(["topic", "rank", "term", "prob"], rows)}
    if a.docs:
        docs = read_docs(a.docs)
        topics = _doc_topics(model, docs, ctx.seed)
        files["assignments.csv"] = _csv_text(["id", "topic"], [[d.id, t] for d, t in zip(docs, topics)])
    ctx.emit_dir("topics", "topics", {"model": a.model, "docs": a.docs}, {"top": n}, files)


def cmd_label(ctx: Ctx):
    a = ctx.args
    model = load_lda(a.model)
    try:
        with open(a.map, encoding="utf-8") as fh:
            label_map = TopicLabelMap.from_json(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read label map: {exc}") from exc
    missing = label_map.missing(model.k)
    if missing:
        print(f"warning: topics without a label: {missing}", file=sys.stderr)
    docs = read_docs(a.docs)
    topics = _doc_topics(model, docs, ctx.seed)
    table = apply_label_map(zip((d.id for d in docs), topics), label_map)
    files = {"labels.csv": _csv_text(["label", "count", "pct"],
                                     [[lab, c, f"{pct:.2f}"] for lab, (c, pct) in table.items()])}
    city = a.city or ctx.cfg.get("city")
    if city:
        offset = ctx.city().utc_offset_minutes
        times = [localize_timestamp(parse_created_at(d.created_at), offset) for d in docs]
        m = topic_day_of_week(topics, times, model.k)
        files["topic_weekday.csv"] = _csv_text(["topic"] + list(charts.WEEKDAYS),
                                               [[k] + [f"{v:.6f}" for v in m[k]] for k in range(model.k)])
    ctx.emit_dir("labels", "labels", {"model": a.model, "map": a.map, "docs": a.docs}, {}, files)


# ---- classification ------------------------------------------------------

def _classifier_params(ctx: Ctx, name: str) -> dict:
    return ctx.cfg.section("forest" if name == "forest" else "linear")


def _feature_inputs(ctx: Ctx):
    a = ctx.args
    kind = pick(ctx.cfg, "classifier.features", a.features, "both", str)
    if kind not in FEATURE_KINDS:
        raise ConfigError(f"features must be one of {', '.join(FEATURE_KINDS)}")
    vocab = load_vocab(a.vocab) if a.vocab and kind != "boe" else None
    emb = load_embedding(a.embeddings) if a.embeddings and kind != "bow" else None
    return kind, vocab, emb


def cmd_train_classifier(ctx: Ctx):
    a = ctx.args
    name = pick(ctx.cfg, "classifier.model", a.classifier, "svm", str)
    kind, vocab, emb = _feature_inputs(ctx)
    docs, y = labeled_docs(read_docs(a.docs), read_labels(a.labels), a.split)
    X = build_features(kind, docs, vocab, emb)
    params = _classifier_params(ctx, name)
    model = make_trainer(name, ctx.seed, params)(X, y)
    extra = {"classifier": name, "features": kind,
             "vocab": file_digest(a.vocab) if vocab is not None else None,
             "embeddings": file_digest(a.embeddings) if emb is not None else None,
             "scaler": X.scaler.to_dict() if X.scaler is not None else None}
    inputs = {"docs": a.docs, "labels": a.labels, "vocab": a.vocab if vocab else None,
              "embeddings": a.embeddings if emb else None}
    run = dict(params, classifier=name, features=kind, split=a.split, seed=ctx.seed)
    if name == "forest":
        print(f"oob_error {model.oob_error:.6f}", file=sys.stderr)
        ctx.emit("models", f"{name}-{kind}", "cprf", inputs, run, lambda p: save_forest(model, p, extra))
    else:
        ctx.emit("models", f"{name}-{kind}", "cplin", inputs, run, lambda p: save_linear(model, p, extra))


def load_model(path):
    header = None
    try:
        header = check_magic(path, LINEAR_MAGIC)
    except ArtifactError:
        pass
    if header is not None:
        return load_linear(path)
    check_magic(path, FOREST_MAGIC)
    return load_forest(path)


def _model_features(ctx: Ctx, extra: dict, docs):
    a = ctx.args
    kind = extra["features"]
    vocab = emb = None
    if extra.get("vocab"):
        if not a.vocab:
            raise ConfigError("this model needs --vocab")
        check_digest(a.vocab, extra["vocab"], "vocabulary")
        vocab = load_vocab(a.vocab)
    if extra.get("embeddings"):
        if not a.embeddings:
            raise ConfigError("this model needs --embeddings")
        check_digest(a.embeddings, extra["embeddings"], "embedding model")
        emb = load_embedding(a.embeddings)
    scaler = Standardizer.from_dict(extra["scaler"]) if extra.get("scaler") else None
    return build_features(kind, docs, vocab, emb, scaler)


def _summary_row(name, kind, r) -> str:
    auc = "" if r.auc is None or (isinstance(r.auc, float) and np.isnan(r.auc)) else f"{r.auc:.6f}"
    return f"{name},{kind},{r.precision:.6f},{r.recall:.6f},{r.f1:.6f},{auc}\n"


def cmd_evaluate(ctx: Ctx):
    a = ctx.args
    docs = read_docs(a.docs)
    labels = read_labels(a.labels)
    if a.cv:
        name = pick(ctx.cfg, "classifier.model", a.classifier, "svm", str)
        kind, vocab, emb = _feature_inputs(ctx)
        rows, y = labeled_docs(docs, labels, a.split)
        X = build_features(kind, rows, vocab, emb)
        stratified = not a.no_stratify
        print(f"cv: k={a.cv} stratified={stratified}", file=sys.stderr)
        res = k_fold_cv(X, y, make_trainer(name, ctx.seed, _classifier_params(ctx, name)), a.cv, ctx.seed,
                        stratified)
        report = dict(res.to_dict(), classifier=name, features=kind, k=a.cv, stratified=stratified)
        summary = CSV_SUMMARY_HEADER + _summary_row(name, kind, res.mean)
        inputs = {"docs": a.docs, "labels": a.labels, "vocab": a.vocab, "embeddings": a.embeddings}
        params = {"cv": a.cv, "classifier": name, "features": kind, "split": a.split}
    else:
        if not a.model:
            raise ConfigError("evaluate needs --model or --cv")
        model, extra = load_model(a.model)
        rows, y = labeled_docs(docs, labels, a.split)
        X = _model_features(ctx, extra, rows)
        r = EvalReport.from_scores(model.decision_score(X), y, model.threshold)
        report = dict(r.to_dict(), classifier=extra["classifier"], features=extra["features"])
        summary = CSV_SUMMARY_HEADER + _summary_row(extra["classifier"], extra["features"], r)
        inputs = {"model": a.model, "docs": a.docs, "labels": a.labels}
        params = {"split": a.split}
    files = {"report.json": json.dumps(report, sort_keys=True, indent=1) + "\n", "summary.csv": summary}
    ctx.emit_dir("reports", "evaluate", inputs, params, files)


def cmd_logo(ctx: Ctx):
    a = ctx.args
    name = pick(ctx.cfg, "classifier.model", a.classifier, "svm", str)
    kind, vocab, emb = _feature_inputs(ctx)
    labels = read_labels(a.labels)
    docs = [d for d in read_docs(a.docs) if d.id in labels and labels[d.id].label != 0]
    if not docs:
        raise EmptyCorpus("no labeled documents")
    X = build_features(kind, docs, vocab, emb)
    pos: Dict[str, list] = {}
    neg, held = [], []
    for i, d in enumerate(docs):
        lab = labels[d.id]
        if lab.label > 0:
            if a.split is None or lab.split == a.split:
                pos.setdefault(lab.mode, []).append(i)
        elif lab.split == "test" and a.heldout_split:
            held.append(i)
        else:
            neg.append(i)
    n_test = pick(ctx.cfg, "logo.test_negatives", a.test_negatives, 300, int)
    modes = a.modes.split(",") if a.modes else None
    res = leave_one_group_out(X, pos, neg, make_trainer(name, ctx.seed, _classifier_params(ctx, name)),
                              n_test, ctx.seed, held if a.heldout_split else None, modes)
    csv_rows = "mode,precision,recall,f1,auc,train_pos,train_neg,test_pos,test_neg\n"
    for m, r in res.per_mode.items():
        s = res.sizes[m]
        csv_rows += (f"{m},{r.precision:.6f},{r.recall:.6f},{r.f1:.6f},{r.auc:.6f},"
                     f"{s['train_pos']},{s['train_neg']},{s['test_pos']},{s['test_neg']}\n")
    mn = res.mean
    csv_rows += f"mean,{mn.precision:.6f},{mn.recall:.6f},{mn.f1:.6f},{mn.auc:.6f},,,,\n"
    files = {"logo.json": json.dumps(dict(res.to_dict(), classifier=name, features=kind),
                                     sort_keys=True, indent=1) + "\n",
             "logo.csv": csv_rows}
    inputs = {"docs": a.docs, "labels": a.labels, "vocab": a.vocab, "embeddings": a.embeddings}
    ctx.emit_dir("reports", f"logo-{name}-{kind}", inputs,
                 {"classifier": name, "features": kind, "test_negatives": n_test, "split": a.split}, files)


def cmd_predict(ctx: Ctx):
    a = ctx.args
    model, extra = load_model(a.model)
    docs = read_docs(a.docs)
    if not docs:
        text = "id\tscore\tlabel\n"
    else:
        X = _model_features(ctx, extra, docs)
        scores = model.decision_score(X)
        text = "id\tscore\tlabel\n" + "".join(
            f"{d.id}\t{s:.6f}\t{1 if s > model.threshold else -1}\n" for d, s in zip(docs, scores))
    ctx.emit("predictions", "predictions", "tsv", {"model": a.model, "docs": a.docs}, {},
             _text_writer(text))


# ---- aggregate / report --------------------------------------------------

def _aggregate_files(ctx: Ctx):
    city = ctx.city()
    records, stats = read_path(ctx.args.input)
    t = agg.TemporalFold(city.utc_offset_minutes)
    u = agg.UserFold()
    m = agg.MetadataFold()
    for rec in records:
        t.add(rec.created_at_utc)
        u.posts[rec.user_id] += 1
        m.update([rec])
    temporal = agg.temporal_from_fold(t)
    activity = agg.activity_from_fold(u)
    files = {
        "daily.csv": agg.daily_csv(temporal),
        "weekday_summary.csv": agg.weekday_csv(temporal),
        "hour_summary.csv": agg.hour_csv(temporal),
        "user_activity.csv": agg.user_activity_csv(activity),
        "metadata.csv": agg.metadata_csv(agg.composition_from_fold(m)),
    }
    return city, temporal, activity, files


def cmd_aggregate(ctx: Ctx):
    city, _, _, files = _aggregate_files(ctx)
    ctx.emit_dir("aggregates", f"aggregate-{city.name}", {"input": ctx.args.input},
                 {"city": city.name, "utc_offset_minutes": city.utc_offset_minutes}, files)


def cmd_report(ctx: Ctx):
    a = ctx.args
    city, temporal, activity, files = _aggregate_files(ctx)
    files["daily.svg"] = charts.line_chart([c for _, c in temporal.daily], [d.isoformat() for d, _ in temporal.daily],
                                           f"Tweets per day ({city.name})")
    files["weekday.svg"] = charts.box_plot([(charts.WEEKDAYS[w], temporal.weekday[w]) for w in range(7)],
                                           "Tweets per day, by weekday")
    files["hour.svg"] = charts.box_plot([(str(h), temporal.hour[h]) for h in range(24)],
                                        "Tweets per hour of day")
    files["user_activity.svg"] = charts.scatter(activity.loglog_points(), "Users by number of posts (log-log)",
                                                "log10 posts", "log10 users")
    if a.lda and a.docs:
        model = load_lda(a.lda)
        docs = read_docs(a.docs)
        topics = _doc_topics(model, docs, ctx.seed)
        times = [localize_timestamp(parse_created_at(d.created_at), city.utc_offset_minutes) for d in docs]
        mat = topic_day_of_week(topics, times, model.k)
        files["topic_weekday.svg"] = charts.heatmap(mat.tolist(), [f"topic {k}" for k in range(model.k)],
                                                    charts.WEEKDAYS, "Topic share by weekday")
    ctx.emit_dir("reports", f"report-{city.name}", {"input": a.input, "lda": a.lda, "docs": a.docs},
                 {"city": city.name}, files)


# ---- synth ---------------------------------------------------------------

def cmd_synth(ctx: Ctx):
    a = ctx.args
    seed = ctx.seed
    kind = a.kind
    if kind == "fixture":
        city = ctx.city()
        lang = city.languages[0] if city.languages else "en"
        records, ledger = generate_fixture(seed, city.box, city.utc_offset_minutes, lang)
    elif kind == "topics":
        records, ledger = generate_topic_corpus(planted_topics(a.n_topics), a.n_docs, 15, seed)
    elif kind == "classification":
        lang = a.lang or "en"
        records, ledger = generate_classification_corpus(
            planted_modes(lang), REFERENCE_MODE_COUNTS, a.n_docs, seed, holdout=True,
            n_test_negatives=300, n_background=a.n_background, lang=lang)
    elif kind == "activity":
        records, ledger = generate_activity(a.days, [40, 42, 45, 44, 50, 60, 55], seed)
    else:
        raise ConfigError(f"unknown synth kind {kind!r}")
    files = {"tweets.ndjson": dump_ndjson(records), "ledger.json": ledger.to_json() + "\n"}
    rows = [(rid, f["label"], f.get("mode") or "", f.get("split", "")) for rid, f in ledger.records.items()
            if f.get("label") in (1, -1)]
    if rows:
        files["labels.tsv"] = labels_tsv(rows)
    ctx.emit_dir("synth", f"synth-{kind}", {}, {"kind": kind, "seed": seed}, files)


# ---- argument parsing ----------------------------------------------------

def _common(p):
    p.add_argument("--seed", type=int, default=None, help="random seed (overrides the config file)")
    p.add_argument("--config", default=None, help="dotted key = value config file")
    p.add_argument("--city", default=None, help="city preset or a city.<name> section of the config")
    p.add_argument("--store", default=None, help="artifact root (default $CITYPULSE_HOME or ./.citypulse)")


def _features_args(p):
    p.add_argument("--features", choices=FEATURE_KINDS, default=None)
    p.add_argument("--vocab")
    p.add_argument("--embeddings")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="citypulse", description="Geo-located tweet analysis pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, out="file"):
        p = sub.add_parser(name, help=help_text)
        _common(p)
        if out == "file":
            p.add_argument("--out", default=None, help="output file (default: artifact store)")
        else:
            p.add_argument("--out-dir", default=None, help="output directory (default: artifact store)")
        p.set_defaults(func=fn)
        return p

    p = add("filter", cmd_filter, "keep tweets inside a city")
    p.add_argument("input")
    p.add_argument("--any-lang", action="store_true", help="do not filter on the city's languages")

    p = add("preprocess", cmd_preprocess, "tokenize and clean tweets into token docs")
    p.add_argument("input")
    p.add_argument("--preset", default=None, help="topic or travel")
    p.add_argument("--lang", default=None)
    p.add_argument("--stopwords", default=None, help="stop-word file replacing the bundled list")
    p.add_argument("--min-length", type=int, default=None)

    p = add("vocab", cmd_vocab, "build a vocabulary from token docs")
    p.add_argument("docs")
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--max-df", type=float, default=None)
    p.add_argument("--max-size", type=int, default=None)

    p = add("train-embeddings", cmd_train_embeddings, "train PV-DBOW or skip-gram embeddings")
    p.add_argument("docs")
    p.add_argument("--vocab", required=True)
    p.add_argument("--model", default=None, help="pvdbow (default) or skipgram")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)

    p = add("train-lda", cmd_train_lda, "fit LDA by collapsed Gibbs sampling")
    p.add_argument("docs")
    p.add_argument("--vocab", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)

    p = add("topics", cmd_topics, "top words per topic (and doc assignments)", out="dir")
    p.add_argument("model")
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--docs", default=None)

    p = add("label", cmd_label, "aggregate docs by manually labeled topics", out="dir")
    p.add_argument("model")
    p.add_argument("--map", required=True, help="JSON label map")
    p.add_argument("--docs", required=True)

    p = add("train-classifier", cmd_train_classifier, "train a travel-related classifier")
    p.add_argument("docs")
    p.add_argument("--labels", required=True)
    p.add_argument("--classifier", choices=CLASSIFIERS, default=None)
    p.add_argument("--split", default=None, help="only use labeled rows of this split")
    _features_args(p)

    p = add("evaluate", cmd_evaluate, "evaluate a model, or run k-fold CV", out="dir")
    p.add_argument("docs")
    p.add_argument("--labels", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--split", default=None)
    p.add_argument("--cv", type=int, default=None, help="k for k-fold cross-validation")
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--classifier", choices=CLASSIFIERS, default=None)
    _features_args(p)

    p = add("logo", cmd_logo, "leave-one-group-out over transport modes", out="dir")
    p.add_argument("docs")
    p.add_argument("--labels", required=True)
    p.add_argument("--classifier", choices=CLASSIFIERS, default=None)
    p.add_argument("--split", default="train", help="split the positives come from")
    p.add_argument("--test-negatives", type=int, default=None)
    p.add_argument("--heldout-split", action="store_true",
                   help="draw test negatives from negatives labeled split=test")
    p.add_argument("--modes", default=None, help="comma-separated modes to hide (default all)")
    _features_args(p)

    p = add("predict", cmd_predict, "score token docs with a stored model")
    p.add_argument("docs")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab")
    p.add_argument("--embeddings")

    p = add("aggregate", cmd_aggregate, "temporal, user and metadata statistics", out="dir")
    p.add_argument("input")

    p = add("report", cmd_report, "aggregates plus SVG charts", out="dir")
    p.add_argument("input")
    p.add_argument("--lda", default=None)
    p.add_argument("--docs", default=None)

    p = add("synth", cmd_synth, "generate a synthetic corpus with its ledger", out="dir")
    p.add_argument("--kind", choices=("fixture", "topics", "classification", "activity"), default="fixture")
    p.add_argument("--n-docs", type=int, default=1686)
    p.add_argument("--n-topics", type=int, default=5)
    p.add_argument("--n-background", type=int, default=4000)
    p.add_argument("--days", type=int, default=90)
    p.add_argument("--lang", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(Ctx(args))
    except CityPulseError as exc:
        print(f"ERROR {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR IOError: {_one_line(exc)}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ERROR ConfigError: {_one_line(exc)}", file=sys.stderr)
        return 1
    return 0


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
