"""LDA by collapsed Gibbs sampling, plus topic inspection and label aggregation."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from .container import read_container, write_container
from .errors import ConfigError, EmptyCorpus, EmptyVocabulary
from .features.vocab import Vocabulary

MAGIC = "CPLDA1"
UNLABELED = "unlabeled"


@dataclass
class LdaConfig:
    k: int = 50
    iterations: int = 20
    alpha: Optional[float] = None
    beta: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.iterations < 1:
            raise ValueError("k >= 1 and iterations >= 1 required")
        if self.alpha is None:
            self.alpha = 50.0 / self.k
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")


@dataclass
class LdaModel:
    config: LdaConfig
    vocab: Vocabulary
    nkw: np.ndarray         # K x V topic-word counts
    nk: np.ndarray          # K topic totals
    ndk: np.ndarray         # M x K document-topic counts
    nd: np.ndarray          # M document lengths
    z: np.ndarray           # flat token assignments
    words: np.ndarray       # flat token ids, aligned with z
    offsets: np.ndarray     # M + 1 document offsets into z / words
    doc_ids: Tuple[str, ...] = ()

    @property
    def k(self) -> int:
        return self.nkw.shape[0]

    def theta(self) -> np.ndarray:
        a = self.config.alpha
        return (self.ndk + a) / (self.nd[:, None] + self.k * a)

    def phi(self) -> np.ndarray:
        b = self.config.beta
        V = self.nkw.shape[1]
        return (self.nkw + b) / (self.nk[:, None] + V * b)


@njit(cache=True)
def _init_counts(words, z, offsets, nkw, nk, ndk, nd):
    for d in range(offsets.shape[0] - 1):
        for i in range(offsets[d], offsets[d + 1]):
            k = z[i]
            nkw[k, words[i]] += 1
            nk[k] += 1
            ndk[d, k] += 1
            nd[d] += 1


@njit(cache=True)
def _gibbs_sweep(words, z, offsets, nkw, nk, ndk, uniforms, alpha, beta, update_topic_word):
    """Resample every token once, in corpus order.

    p(k) is proportional to (n_dk + alpha)(n_kw + beta)/(n_k + V beta), all
    counts excluding the token being resampled. ``uniforms[i]`` picks the
    new topic by inverse CDF. With ``update_topic_word`` false, ``nkw`` and
    ``nk`` stay frozen (inference on unseen documents).
    """
    K = nkw.shape[0]
    vbeta = nkw.shape[1] * beta
    p = np.empty(K)
    for d in range(offsets.shape[0] - 1):
        for i in range(offsets[d], offsets[d + 1]):
            w = words[i]
            old = z[i]
            ndk[d, old] -= 1
            if update_topic_word:
                nkw[old, w] -= 1
                nk[old] -= 1
            total = 0.0
            for k in range(K):
                total += (ndk[d, k] + alpha) * (nkw[k, w] + beta) / (nk[k] + vbeta)
                p[k] = total
            u = uniforms[i] * total
            new = K - 1
            for k in range(K):
                if u < p[k]:
                    new = k
                    break
            z[i] = new
            ndk[d, new] += 1
            if update_topic_word:
                nkw[new, w] += 1
                nk[new] += 1


def _streams(seed):
    init, sweep = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(init)), np.random.Generator(np.random.PCG64(sweep))


def _encode(docs, vocab):
    encoded = [vocab.encode(d) for d in docs]
    lengths = np.array([len(d) for d in encoded], dtype=np.int64)
    offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    words = np.array([i for d in encoded for i in d], dtype=np.int64)
    return words, offsets


def check_counts(model: LdaModel) -> None:
    """Raise ``AssertionError`` unless the count tables match the assignments."""
    K, V = model.nkw.shape
    M = model.ndk.shape[0]
    assert (model.nkw >= 0).all() and (model.ndk >= 0).all()
    assert np.array_equal(model.nkw.sum(axis=1), model.nk)
    assert np.array_equal(model.ndk.sum(axis=1), model.nd)
    assert ((model.z >= 0) & (model.z < K)).all()
    doc_of = np.repeat(np.arange(M), np.diff(model.offsets))
    ndk = np.zeros((M, K), dtype=np.int64)
    np.add.at(ndk, (doc_of, model.z), 1)
    nkw = np.zeros((K, V), dtype=np.int64)
    np.add.at(nkw, (model.z, model.words), 1)
    assert np.array_equal(ndk, model.ndk)
    assert np.array_equal(nkw, model.nkw)


def train_lda(docs: Sequence[Sequence[str]], vocab: Vocabulary, config: LdaConfig = None,
              doc_ids: Sequence[str] = None,
              on_sweep: Callable[[LdaModel, int], None] = None) -> LdaModel:
    """Fit LDA to token-list ``docs`` (out-of-vocabulary tokens are dropped).

    ``on_sweep(model, sweep)`` is called after every sweep with the live
    model, e.g. :func:`check_counts` as a debug hook.
    """
    config = config or LdaConfig()
    if len(vocab) == 0:
        raise EmptyVocabulary("vocabulary is empty")
    if len(docs) == 0:
        raise EmptyCorpus("no documents")
    words, offsets = _encode(docs, vocab)
    if words.size == 0:
        raise EmptyCorpus("no in-vocabulary tokens")
    K, V, M = config.k, len(vocab), len(docs)
    init_rng, sweep_rng = _streams(config.seed)
    z = init_rng.integers(0, K, size=words.size).astype(np.int64)
    nkw = np.zeros((K, V), dtype=np.int64)
    nk = np.zeros(K, dtype=np.int64)
    ndk = np.zeros((M, K), dtype=np.int64)
    nd = np.zeros(M, dtype=np.int64)
    _init_counts(words, z, offsets, nkw, nk, ndk, nd)
    ids = tuple(doc_ids) if doc_ids is not None else tuple(str(i) for i in range(M))
    model = LdaModel(config, vocab, nkw, nk, ndk, nd, z, words, offsets, ids)
    for sweep in range(config.iterations):
        u = sweep_rng.random(words.size)
        _gibbs_sweep(words, z, offsets, nkw, nk, ndk, u, config.alpha, config.beta, True)
        if on_sweep is not None:
            on_sweep(model, sweep)
    return model


def infer_topics(model: LdaModel, doc: Sequence[str], infer_iterations: int = 20,
                 seed: int = None) -> np.ndarray:
    """Document-topic distribution of an unseen doc against frozen topic-word counts."""
    K = model.k
    a = model.config.alpha
    words = np.array(model.vocab.encode(doc), dtype=np.int64)
    if words.size == 0:
        return np.full(K, 1.0 / K)
    init_rng, sweep_rng = _streams(model.config.seed if seed is None else seed)
    z = init_rng.integers(0, K, size=words.size).astype(np.int64)
    ndk = np.zeros((1, K), dtype=np.int64)
    np.add.at(ndk[0], z, 1)
    offsets = np.array([0, words.size], dtype=np.int64)
    for _ in range(infer_iterations):
        u = sweep_rng.random(words.size)
        _gibbs_sweep(words, z, offsets, model.nkw, model.nk, ndk, u, a, model.config.beta, False)
    theta = (ndk[0] + a) / (words.size + K * a)
    return theta / theta.sum()


def perplexity(model: LdaModel, docs: Sequence[Sequence[str]], infer_iterations: int = 20) -> float:
    phi = model.phi()
    log_lik = 0.0
    n = 0
    for r, doc in enumerate(docs):
        ids = model.vocab.encode(doc)
        if not ids:
            continue
        theta = infer_topics(model, doc, infer_iterations, seed=model.config.seed + r)
        log_lik += float(np.log(theta @ phi[:, ids]).sum())
        n += len(ids)
    return math.exp(-log_lik / n) if n else float("inf")


@dataclass(frozen=True)
class TopicSummary:
    topic: int
    terms: Tuple[Tuple[str, float], ...]


def top_words(model: LdaModel, topic: int, n: int = 10) -> TopicSummary:
    row = model.phi()[topic]
    terms = model.vocab.terms
    order = sorted(range(len(terms)), key=lambda w: (-row[w], terms[w]))[:n]
    return TopicSummary(topic, tuple((terms[w], float(row[w])) for w in order))


def dominant_topic(theta) -> int:
    return int(np.argmax(np.asarray(theta)))


@dataclass
class TopicLabelMap:
    labels: Dict[int, str] = field(default_factory=dict)
    unlabeled: frozenset = frozenset()

    def label(self, topic: int) -> str:
        return self.labels.get(int(topic), UNLABELED)

    def missing(self, k: int) -> List[int]:
        """Topic ids in ``[0, k)`` neither mapped nor explicitly unlabeled."""
        return [t for t in range(k) if t not in self.labels and t not in self.unlabeled]

    @classmethod
    def from_json(cls, text: str) -> "TopicLabelMap":
        try:
            d = json.loads(text)
            labels = {int(k): str(v) for k, v in d.get("labels", {}).items()}
            unlabeled = frozenset(int(t) for t in d.get("unlabeled", []))
        except (ValueError, AttributeError, TypeError) as exc:
            raise ConfigError(f"bad label map: {exc}") from exc
        return cls(labels, unlabeled)

    def to_json(self) -> str:
        return json.dumps({"labels": {str(k): v for k, v in sorted(self.labels.items())},
                           "unlabeled": sorted(self.unlabeled)}, ensure_ascii=False)


def apply_label_map(assignments: Iterable[Tuple[str, int]], label_map: TopicLabelMap) -> Dict[str, Tuple[int, float]]:
    """``{label: (count, percentage)}`` with unmapped topics under ``"unlabeled"``."""
    counts = Counter(label_map.label(topic) for _, topic in assignments)
    total = sum(counts.values())
    return {
        label: (c, 100.0 * c / total)
        for label, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    }


def topic_day_of_week(topics: Sequence[int], local_times: Sequence, k: int) -> np.ndarray:
    """K x 7 matrix; row k is the weekday share (Monday = 0) of docs assigned to topic k."""
    m = np.zeros((k, 7))
    for topic, ts in zip(topics, local_times):
        m[int(topic), ts.weekday()] += 1
    sums = m.sum(axis=1, keepdims=True)
    np.divide(m, sums, out=m, where=sums > 0)
    return m


def save_lda(model: LdaModel, path) -> None:
    header = {
        "config": asdict(model.config),
        "vocab": model.vocab.to_dict(),
        "doc_ids": list(model.doc_ids),
    }
    write_container(path, MAGIC, header, {
        "nkw": ("i32", model.nkw),
        "ndk": ("i32", model.ndk),
        "z": ("i32", model.z),
        "words": ("i32", model.words),
        "offsets": ("i32", model.offsets),
    })


def load_lda(path) -> LdaModel:
    header, arr = read_container(path, MAGIC)
    nkw = arr["nkw"].astype(np.int64)
    ndk = arr["ndk"].astype(np.int64)
    return LdaModel(
        LdaConfig(**header["config"]),
        Vocabulary.from_dict(header["vocab"]),
        nkw, nkw.sum(axis=1), ndk, ndk.sum(axis=1),
        arr["z"].astype(np.int64), arr["words"].astype(np.int64), arr["offsets"].astype(np.int64),
        tuple(header["doc_ids"]),
    )
