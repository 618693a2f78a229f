"""Unigram vocabulary under count / document-frequency / size limits, and BoW vectors."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..errors import EmptyCorpus


@dataclass
class Vocabulary:
    terms: List[str]
    counts: List[int]
    df: List[int]
    n_docs: int
    min_count: int = 1
    max_df_ratio: float = 1.0
    max_size: int = 0
    warnings: Tuple[str, ...] = ()
    index: Dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.terms)}

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index

    def get(self, term, default=None):
        return self.index.get(term, default)

    def encode(self, tokens: Iterable[str]) -> List[int]:
        """Indices of in-vocabulary tokens, order kept, OOV dropped."""
        idx = self.index
        return [idx[t] for t in tokens if t in idx]

    def to_dict(self) -> dict:
        return {
            "terms": self.terms,
            "counts": self.counts,
            "df": self.df,
            "n_docs": self.n_docs,
            "params": {
                "min_count": self.min_count,
                "max_df_ratio": self.max_df_ratio,
                "max_size": self.max_size,
            },
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        p = d.get("params", {})
        return cls(list(d["terms"]), list(d["counts"]), list(d["df"]), int(d["n_docs"]),
                   p.get("min_count", 1), p.get("max_df_ratio", 1.0), p.get("max_size", 0),
                   tuple(d.get("warnings", ())))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


def build_vocabulary(docs: Iterable[Sequence[str]], min_count: int = 1,
                     max_df_ratio: float = 1.0, max_size: int = 0) -> Vocabulary:
    """Keep terms with count >= ``min_count`` and df/n_docs <= ``max_df_ratio``.

    Survivors are ranked by corpus count (ties lexicographic) and the first
    ``max_size`` kept; ``max_size=0`` means unbounded. An empty result is
    returned, not raised, and flagged with ``"EmptyVocabulary"`` in ``warnings``.
    """
    if not 0 < max_df_ratio <= 1:
        raise ValueError("max_df_ratio must be in (0, 1]")
    if min_count < 1 or max_size < 0:
        raise ValueError("min_count must be >= 1 and max_size >= 0")
    counts: Counter = Counter()
    df: Counter = Counter()
    n_docs = 0
    for doc in docs:
        n_docs += 1
        counts.update(doc)
        df.update(set(doc))
    if n_docs == 0:
        raise EmptyCorpus("no documents")
    kept = [
        t for t, c in counts.items()
        if c >= min_count and df[t] / n_docs <= max_df_ratio
    ]
    kept.sort(key=lambda t: (-counts[t], t))
    if max_size:
        kept = kept[:max_size]
    warnings = () if kept else ("EmptyVocabulary",)
    return Vocabulary(kept, [counts[t] for t in kept], [df[t] for t in kept], n_docs,
                      min_count, max_df_ratio, max_size, warnings)


@dataclass(frozen=True)
class BowVector:
    indices: Tuple[int, ...]
    counts: Tuple[int, ...]

    def __len__(self):
        return len(self.indices)


def bow_vector(doc: Iterable[str], vocab: Vocabulary) -> BowVector:
    c = Counter(vocab.encode(doc))
    idx = sorted(c)
    return BowVector(tuple(idx), tuple(c[i] for i in idx))


def bow_matrix(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> sparse.csr_matrix:
    """CSR term-frequency matrix, one row per doc."""
    indptr = [0]
    indices: List[int] = []
    data: List[float] = []
    for doc in docs:
        v = bow_vector(doc, vocab)
        indices.extend(v.indices)
        data.extend(v.counts)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(docs), len(vocab)),
    )
