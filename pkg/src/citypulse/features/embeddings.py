"""Skip-gram and PV-DBOW embeddings trained with negative sampling.

Both models share one SGD kernel: a pair ``(input_row, target)`` pushes the
input vector towards the target's output vector and away from ``k`` noise
words drawn from the unigram distribution raised to 0.75. PV-DBOW is the
same thing with one extra input row per document, paired with every token of
that document; when word co-training is on, the skip-gram pairs are mixed in.

All randomness (initial vectors, pair order, negatives) is drawn from numpy
``Generator`` streams derived from the seed before the kernel runs, so a
single-threaded run is bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from numba import njit

from ..errors import DegenerateVocabulary, EmptyCorpus, EmptyVocabulary
from .vocab import Vocabulary

NOISE_POWER = 0.75


@dataclass
class SkipgramConfig:
    dim: int = 100
    window: int = 2
    epochs: int = 10
    negatives: int = 5
    lr: float = 0.025
    min_lr: float = 0.0001
    seed: int = 0
    subsample: float = 0.0
    cotrain_words: bool = True
    infer_epochs: int = 50

    def __post_init__(self):
        if self.dim <= 0 or self.window < 1 or self.epochs < 1 or self.negatives < 1:
            raise ValueError("dim > 0, window >= 1, epochs >= 1 and negatives >= 1 required")
        if self.lr <= 0 or self.min_lr < 0:
            raise ValueError("learning rates must be positive")

    def to_dict(self):
        return asdict(self)


@dataclass
class EmbeddingModel:
    vocab: Vocabulary
    config: SkipgramConfig
    w_in: np.ndarray
    w_out: np.ndarray
    doc_vectors: Optional[np.ndarray] = None
    doc_ids: Sequence[str] = ()
    history: List[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.w_in.shape[1]

    def vector(self, term: str) -> np.ndarray:
        return self.w_in[self.vocab.index[term]]

    def similarity(self, a: str, b: str) -> float:
        return cosine(self.vector(a), self.vector(b))


@dataclass(frozen=True)
class DocEmbedding:
    vector: np.ndarray
    doc_id: str = ""


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(a.dot(b) / (na * nb), -1.0, 1.0))


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sgns_pair_loss(v_in, u_pos, u_negs) -> float:
    """Negative-sampling loss of one pair: -log s(u+.v) - sum log s(-u-.v)."""
    v_in = np.asarray(v_in, dtype=np.float64)
    loss = -math.log(_sigmoid(np.dot(u_pos, v_in)))
    for u in u_negs:
        loss -= math.log(_sigmoid(-np.dot(u, v_in)))
    return float(loss)


def sgns_pair_grad(v_in, u_pos, u_negs):
    """Analytic gradient of :func:`sgns_pair_loss` w.r.t. ``(v_in, u_pos, u_negs)``."""
    v_in = np.asarray(v_in, dtype=np.float64)
    u_pos = np.asarray(u_pos, dtype=np.float64)
    u_negs = np.asarray(u_negs, dtype=np.float64)
    gp = _sigmoid(u_pos.dot(v_in)) - 1.0
    gn = _sigmoid(u_negs.dot(v_in))
    g_in = gp * u_pos + gn.dot(u_negs)
    g_pos = gp * v_in
    g_negs = gn[:, None] * v_in[None, :]
    return g_in, g_pos, g_negs


@njit(cache=True)
def _sgns_kernel(w_in, w_out, inputs, targets, negs, lr_start, lr_end, update_out):
    """One pass over the pairs in the given order; returns the summed loss."""
    n = inputs.shape[0]
    dim = w_in.shape[1]
    k = negs.shape[1]
    grad = np.zeros(dim, dtype=w_in.dtype)
    total = 0.0
    for p in range(n):
        lr = lr_start + (lr_end - lr_start) * (p / n if n > 1 else 0.0)
        i = inputs[p]
        t = targets[p]
        for d in range(dim):
            grad[d] = 0.0
        for s in range(k + 1):
            if s == 0:
                w = t
                label = 1.0
            else:
                w = negs[p, s - 1]
                if w == t:
                    continue
                label = 0.0
            dot = 0.0
            for d in range(dim):
                dot += w_in[i, d] * w_out[w, d]
            if dot > 30.0:
                sig = 1.0
            elif dot < -30.0:
                sig = 0.0
            else:
                sig = 1.0 / (1.0 + math.exp(-dot))
            if label == 1.0:
                total -= math.log(max(sig, 1e-12))
            else:
                total -= math.log(max(1.0 - sig, 1e-12))
            g = lr * (label - sig)
            for d in range(dim):
                grad[d] += g * w_out[w, d]
            if update_out:
                for d in range(dim):
                    w_out[w, d] += g * w_in[i, d]
        for d in range(dim):
            w_in[i, d] += grad[d]
    return total


@njit(cache=True)
def _window_pairs(flat, offsets, keep, window, input_offset):
    """Skip-gram (center, context) pairs that never cross a document boundary."""
    n_docs = offsets.shape[0] - 1
    cap = 0
    for d in range(n_docs):
        m = 0
        for t in range(offsets[d], offsets[d + 1]):
            if keep[t]:
                m += 1
        cap += m * 2 * window
    centers = np.empty(cap, dtype=np.int64)
    contexts = np.empty(cap, dtype=np.int64)
    buf = np.empty(flat.shape[0], dtype=np.int64)
    n = 0
    for d in range(n_docs):
        m = 0
        for t in range(offsets[d], offsets[d + 1]):
            if keep[t]:
                buf[m] = flat[t]
                m += 1
        for a in range(m):
            lo = max(0, a - window)
            hi = min(m, a + window + 1)
            for b in range(lo, hi):
                if b != a:
                    centers[n] = buf[a] + input_offset
                    contexts[n] = buf[b]
                    n += 1
    return centers[:n], contexts[:n]


def _flatten(encoded):
    lengths = np.fromiter((len(d) for d in encoded), dtype=np.int64, count=len(encoded))
    offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    flat = np.fromiter((i for d in encoded for i in d), dtype=np.int64, count=int(offsets[-1]))
    return flat, offsets


def noise_cdf(counts) -> np.ndarray:
    weights = np.asarray(counts, dtype=np.float64) ** NOISE_POWER
    cdf = np.cumsum(weights)
    return cdf / cdf[-1]


def draw_negatives(rng: np.random.Generator, cdf: np.ndarray, n: int, k: int) -> np.ndarray:
    """``n x k`` noise word indices by inverse-CDF lookup of uniform draws."""
    u = rng.random((n, k))
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1).astype(np.int64)


def _keep_mask(rng, flat, counts, subsample):
    if subsample <= 0:
        return np.ones(flat.shape[0], dtype=np.bool_)
    freq = np.asarray(counts, dtype=np.float64)
    freq = freq / freq.sum()
    p_keep = np.minimum(1.0, (np.sqrt(freq / subsample) + 1.0) * subsample / freq)
    return rng.random(flat.shape[0]) < p_keep[flat]


class _Streams:
    """Independent generators for init / order / negatives / subsampling / evaluation."""

    def __init__(self, seed: int):
        children = np.random.SeedSequence(seed).spawn(5)
        self.init, self.order, self.noise, self.sample, self.eval = (
            np.random.Generator(np.random.PCG64(c)) for c in children
        )


def _check_corpus(encoded, vocab):
    if len(vocab) == 0:
        raise EmptyVocabulary("vocabulary is empty")
    if not any(len(d) for d in encoded):
        raise EmptyCorpus("no in-vocabulary tokens")
    if len(vocab) < 2:
        raise DegenerateVocabulary(f"vocabulary of size {len(vocab)}")


def _eval_loss(w_in, w_out, inputs, targets, negs) -> float:
    if inputs.shape[0] == 0:
        return 0.0
    a = w_in[inputs].astype(np.float64)
    pos = np.einsum("ij,ij->i", a, w_out[targets].astype(np.float64))
    neg = np.einsum("ij,ikj->ik", a, w_out[negs].astype(np.float64))
    mask = negs != targets[:, None]
    loss = np.logaddexp(0.0, -pos) + (np.logaddexp(0.0, neg) * mask).sum(axis=1)
    return float(loss.mean())


def _train(w_in, w_out, vocab, config, streams, make_pairs, eval_size=2000):
    cdf = noise_cdf(vocab.counts)
    history = []
    total_epochs = config.epochs
    # fixed evaluation batch, drawn once from an unsubsampled pass
    ev_in, ev_tg = make_pairs(None)
    if ev_in.shape[0] > eval_size:
        pick = np.sort(streams.eval.choice(ev_in.shape[0], eval_size, replace=False))
        ev_in, ev_tg = ev_in[pick], ev_tg[pick]
    ev_negs = draw_negatives(streams.eval, cdf, ev_in.shape[0], config.negatives)
    lr_span = config.lr - config.min_lr
    for epoch in range(total_epochs):
        inputs, targets = make_pairs(streams.sample)
        order = streams.order.permutation(inputs.shape[0])
        inputs, targets = inputs[order], targets[order]
        negs = draw_negatives(streams.noise, cdf, inputs.shape[0], config.negatives)
        lr_a = config.min_lr + lr_span * (1.0 - epoch / total_epochs)
        lr_b = config.min_lr + lr_span * (1.0 - (epoch + 1) / total_epochs)
        _sgns_kernel(w_in, w_out, inputs, targets, negs, lr_a, lr_b, True)
        history.append(_eval_loss(w_in, w_out, ev_in, ev_tg, ev_negs))
    return history


def _init_rows(rng, rows, dim):
    return ((rng.random((rows, dim)) - 0.5) / dim).astype(np.float32)


def train_skipgram(docs: Sequence[Sequence[str]], vocab: Vocabulary,
                   config: SkipgramConfig = None) -> EmbeddingModel:
    """Skip-gram with negative sampling over ``docs`` (token lists) restricted to ``vocab``."""
    config = config or SkipgramConfig()
    encoded = [vocab.encode(d) for d in docs]
    _check_corpus(encoded, vocab)
    streams = _Streams(config.seed)
    flat, offsets = _flatten(encoded)
    w_in = _init_rows(streams.init, len(vocab), config.dim)
    w_out = np.zeros((len(vocab), config.dim), dtype=np.float32)

    def make_pairs(rng):
        keep = _keep_mask(rng, flat, vocab.counts, config.subsample if rng is not None else 0.0)
        return _window_pairs(flat, offsets, keep, config.window, 0)

    history = _train(w_in, w_out, vocab, config, streams, make_pairs)
    return EmbeddingModel(vocab, config, w_in, w_out, history=history)


def train_pvdbow(docs: Sequence[Sequence[str]], vocab: Vocabulary, config: SkipgramConfig = None,
                 doc_ids: Sequence[str] = None):
    """PV-DBOW: one trainable vector per doc predicting that doc's tokens.

    Returns ``(doc_vectors, model)``; ``model.doc_vectors`` holds the same array.
    With ``config.cotrain_words`` the word vectors are trained by skip-gram in
    the same passes.
    """
    config = config or SkipgramConfig()
    encoded = [vocab.encode(d) for d in docs]
    _check_corpus(encoded, vocab)
    n_docs = len(encoded)
    V = len(vocab)
    streams = _Streams(config.seed)
    flat, offsets = _flatten(encoded)
    doc_of = np.repeat(np.arange(n_docs, dtype=np.int64), np.diff(offsets))
    table = _init_rows(streams.init, V + n_docs, config.dim)
    w_out = np.zeros((V, config.dim), dtype=np.float32)

    def make_pairs(rng):
        keep = _keep_mask(rng, flat, vocab.counts, config.subsample if rng is not None else 0.0)
        d_in = doc_of[keep] + V
        d_tg = flat[keep]
        if not config.cotrain_words:
            return d_in, d_tg
        w_in_idx, w_tg = _window_pairs(flat, offsets, keep, config.window, 0)
        return np.concatenate([d_in, w_in_idx]), np.concatenate([d_tg, w_tg])

    history = _train(table, w_out, vocab, config, streams, make_pairs)
    ids = tuple(doc_ids) if doc_ids is not None else tuple(str(i) for i in range(n_docs))
    model = EmbeddingModel(vocab, config, table[:V].copy(), w_out, table[V:].copy(), ids, history)
    return model.doc_vectors, model


def infer_doc_vector(model: EmbeddingModel, doc: Sequence[str], infer_epochs: int = None,
                     seed: int = None, doc_id: str = "") -> DocEmbedding:
    """Fit a fresh doc vector against the frozen output table.

    Same seed and doc give the same vector; a doc without in-vocabulary
    tokens gets the zero vector.
    """
    cfg = model.config
    epochs = infer_epochs if infer_epochs is not None else cfg.infer_epochs
    tokens = np.asarray(model.vocab.encode(doc), dtype=np.int64)
    if tokens.size == 0:
        return DocEmbedding(np.zeros(model.dim, dtype=np.float32), doc_id)
    streams = _Streams(cfg.seed if seed is None else seed)
    vec = _init_rows(streams.init, 1, model.dim)
    cdf = noise_cdf(model.vocab.counts)
    inputs = np.zeros(tokens.size, dtype=np.int64)
    w_out = model.w_out
    span = cfg.lr - cfg.min_lr
    for epoch in range(epochs):
        order = streams.order.permutation(tokens.size)
        negs = draw_negatives(streams.noise, cdf, tokens.size, cfg.negatives)
        lr_a = cfg.min_lr + span * (1.0 - epoch / epochs)
        lr_b = cfg.min_lr + span * (1.0 - (epoch + 1) / epochs)
        _sgns_kernel(vec, w_out, inputs, tokens[order], negs, lr_a, lr_b, False)
    return DocEmbedding(vec[0].copy(), doc_id)


def infer_matrix(model: EmbeddingModel, docs: Sequence[Sequence[str]], infer_epochs: int = None,
                 seed: int = None) -> np.ndarray:
    """Row-stacked :func:`infer_doc_vector` with a per-row seed ``seed + row``."""
    base = model.config.seed if seed is None else seed
    out = np.zeros((len(docs), model.dim), dtype=np.float32)
    for r, doc in enumerate(docs):
        out[r] = infer_doc_vector(model, doc, infer_epochs, base + r).vector
    return out


def sgd_step(w_in, w_out, i, target, negs, lr):
    """Single kernel update on copies of the tables; used to check the update direction."""
    a = np.array(w_in, dtype=np.float64)
    b = np.array(w_out, dtype=np.float64)
    _sgns_kernel(a, b, np.array([i], dtype=np.int64), np.array([target], dtype=np.int64),
                 np.asarray(negs, dtype=np.int64).reshape(1, -1), lr, lr, True)
    return a, b


MAGIC = "CPEMB1"


def save_embedding(model: EmbeddingModel, path) -> None:
    from ..container import write_container

    arrays = {"input": ("f32", model.w_in), "output": ("f32", model.w_out)}
    if model.doc_vectors is not None:
        arrays["docs"] = ("f32", model.doc_vectors)
    header = {
        "vocab": model.vocab.to_dict(),
        "config": model.config.to_dict(),
        "rows": int(model.w_in.shape[0]),
        "cols": int(model.w_in.shape[1]),
        "doc_ids": list(model.doc_ids),
        "history": [float(h) for h in model.history],
    }
    write_container(path, MAGIC, header, arrays)


def load_embedding(path) -> EmbeddingModel:
    from ..container import read_container

    header, arrays = read_container(path, MAGIC)
    return EmbeddingModel(
        Vocabulary.from_dict(header["vocab"]),
        SkipgramConfig(**header["config"]),
        arrays["input"],
        arrays["output"],
        arrays.get("docs"),
        tuple(header.get("doc_ids", ())),
        list(header.get("history", ())),
    )
