"""Glue shared by the CLI and the end-to-end tests: doc files, label files, feature building."""

from __future__ import annotations

import csv
import io
import json
import zlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classify import ForestConfig, LinearConfig, train_forest, train_linear
from .errors import ConfigError, EmptyCorpus, MalformedJson, RowMismatch
from .features import FeatureMatrix, Standardizer, Vocabulary, bow_matrix, concat_features
from .features.embeddings import EmbeddingModel, infer_doc_vector

FEATURE_KINDS = ("bow", "boe", "both")
CLASSIFIERS = ("svm", "logreg", "forest")


@dataclass(frozen=True)
class Doc:
    id: str
    tokens: Tuple[str, ...]
    created_at: str = ""
    user_id: str = ""
    lang: str = ""

    def to_json(self) -> str:
        return json.dumps({"id": self.id, "tokens": list(self.tokens), "created_at": self.created_at,
                           "user_id": self.user_id, "lang": self.lang},
                          ensure_ascii=False, separators=(",", ":"))


def parse_doc_line(line: str) -> Optional[Doc]:
    obj = json.loads(line)
    if not isinstance(obj, dict) or "tokens" not in obj:
        return None
    return Doc(str(obj["id"]), tuple(obj["tokens"]), obj.get("created_at", ""), obj.get("user_id", ""),
               obj.get("lang", ""))


def read_docs(path) -> List[Doc]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = parse_doc_line(line)
            except ValueError as exc:
                raise MalformedJson(f"{path}:{n}: {exc}") from exc
            if doc is None:
                raise MalformedJson(f"{path}:{n}: not a token doc")
            docs.append(doc)
    return docs


def write_docs(docs: Sequence[Doc]) -> str:
    return "".join(d.to_json() + "\n" for d in docs)


@dataclass(frozen=True)
class Label:
    label: int
    mode: str = ""
    split: str = ""


LABEL_HEADER = ["id", "label", "mode", "split"]


def read_labels(path) -> Dict[str, Label]:
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.reader(fh, delimiter="\t")
        header = next(rows, None)
        if header is None or header[:2] != LABEL_HEADER[:2]:
            raise ConfigError(f"{path}: label file must start with the header {' '.join(LABEL_HEADER)}")
        for row in rows:
            if not row:
                continue
            row = row + [""] * (4 - len(row))
            try:
                out[row[0]] = Label(int(row[1]), row[2], row[3])
            except ValueError:
                raise ConfigError(f"{path}: bad label {row[1]!r} for {row[0]}") from None
    return out


def labels_tsv(rows: Sequence[Tuple[str, int, str, str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(LABEL_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def labeled_docs(docs: Sequence[Doc], labels: Dict[str, Label], split: Optional[str] = None):
    """Docs carrying a +1/-1 label (optionally only one split) and their labels."""
    keep = [d for d in docs if d.id in labels and labels[d.id].label != 0
            and (split is None or labels[d.id].split == split)]
    if not keep:
        raise EmptyCorpus("no labeled documents" + (f" in split {split!r}" if split else ""))
    return keep, np.array([1 if labels[d.id].label > 0 else -1 for d in keep])


def doc_seed(base: int, doc_id: str) -> int:
    return base + zlib.crc32(doc_id.encode("utf-8"))


def embed_docs(model: EmbeddingModel, docs: Sequence[Doc]) -> np.ndarray:
    """Trained paragraph vectors where the model has them; inferred (seeded by doc id) otherwise."""
    known = {d: i for i, d in enumerate(model.doc_ids)} if model.doc_vectors is not None else {}
    out = np.zeros((len(docs), model.dim), dtype=np.float64)
    for r, doc in enumerate(docs):
        i = known.get(doc.id)
        if i is not None:
            out[r] = model.doc_vectors[i]
        else:
            out[r] = infer_doc_vector(model, doc.tokens, None, doc_seed(model.config.seed, doc.id), doc.id).vector
    return out


def build_features(kind: str, docs: Sequence[Doc], vocab: Optional[Vocabulary],
                   embedding: Optional[EmbeddingModel], scaler: Optional[Standardizer] = None) -> FeatureMatrix:
    """BoW, standardized BoE, or both side by side. Pass the training ``scaler`` for test rows."""
    if kind not in FEATURE_KINDS:
        raise ConfigError(f"features must be one of {', '.join(FEATURE_KINDS)}")
    ids = [d.id for d in docs]
    if kind in ("bow", "both") and vocab is None:
        raise ConfigError("BoW features need a vocabulary")
    if kind in ("boe", "both") and embedding is None:
        raise ConfigError("BoE features need an embedding model")
    if kind == "bow":
        return FeatureMatrix.from_bow(bow_matrix([d.tokens for d in docs], vocab), ids)
    dense = embed_docs(embedding, docs)
    if kind == "boe":
        return FeatureMatrix.from_dense(dense, ids, scaler)
    bow = FeatureMatrix.from_bow(bow_matrix([d.tokens for d in docs], vocab), ids)
    return concat_features(bow, dense, ids, scaler)


def make_trainer(name: str, seed: int, params: dict = None):
    params = dict(params or {})
    if name in ("svm", "logreg"):
        cfg = LinearConfig("hinge" if name == "svm" else "log", float(params.get("lam", 1e-4)),
                           int(params.get("epochs", 50)), seed)
        return lambda X, y: train_linear(X, y, cfg, getattr(X, "blocks", ()))
    if name == "forest":
        mf = params.get("max_features")
        cfg = ForestConfig(int(params.get("n_trees", 100)), None if mf in (None, "sqrt") else int(mf),
                           None if params.get("max_depth") is None else int(params["max_depth"]),
                           int(params.get("min_leaf", 1)), seed)
        return lambda X, y: train_forest(X, y, cfg, getattr(X, "blocks", ()))
    raise ConfigError(f"classifier must be one of {', '.join(CLASSIFIERS)}")


def check_rows(fm: FeatureMatrix, docs: Sequence[Doc]) -> None:
    if len(fm) != len(docs):
        raise RowMismatch("feature rows do not match documents")
